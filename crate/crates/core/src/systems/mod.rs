//! Covering systems, 𝓜₋ witnesses, tree maps and points, with finite-depth
//! membership semantics.

pub mod block;
pub mod partition;
pub mod point;
pub mod prefix;
pub mod rationals;
pub mod report;
pub mod tree;
pub mod word;

pub use block::{BlockFilter, BlockSystem, Patterns, Quantifier};
pub use partition::IntervalPartition;
pub use point::Point;
pub use prefix::{Levels, PrefixSystem, RationalLevels, Weight};
pub use report::{
    cylinder_meets_union, membership_report, word_restrict, MembershipReport, MinusWitness, Restrictable, SystemRef,
    Verdict,
};
pub use tree::{NodeExtension, NodeValue};
pub use word::Word;
