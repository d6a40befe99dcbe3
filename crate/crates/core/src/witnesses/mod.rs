//! Theorem-specific constructions and escape procedures. Each construction
//! records its finite checks as [`Check`]s; [`crate::bundle`] packages them.

mod cardinal;
mod meager;
mod orth;
mod small;

use serde::{Deserialize, Serialize};

pub use cardinal::{bounding_merge, dominating_envelope, envelope_contains, BoundingMerge, Envelope, EnvelopeFailure};
pub use meager::{
    comeager_fakenull, density_check, disjoint_positive_family, minus_not_domega, minus_positive_nwd,
    parity_class_report, parity_escape, Comeager, CrossCheck, DensityCheck, DisjointFamily, DomegaEscape, FamilyMember,
    NowhereDense, NwdEscape, NwdStage, ParityEscape,
};
pub use orth::{
    n_fin_not_orth_escape, s_fin_strict_escape, s_not_in_fin, s_orth_minus, NotOrthEscape, SEscape, SNotInFin,
    SOrthMinus, StrictEscape,
};
pub use small::{
    e_not_ideal, e_square_vs_poly, super_start, EEscape, ENotIdeal, ESquare, ESquareEscape, RecursionState,
};

/// One finite check and whether it passed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}
