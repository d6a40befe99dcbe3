//! Exact constructions for parametrized families of small subsets of Baire space.

pub mod bundle;
pub mod cli;
pub mod diagonal;
pub mod error;
pub mod num;
pub mod param;
pub mod systems;
pub mod transforms;
pub mod witnesses;
