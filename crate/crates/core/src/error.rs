use thiserror::Error;

/// Failure vocabulary shared by every module and surfaced by the CLI by name.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("level {level} has {size} words but weight h({level}) = 0")]
    DivisionByZeroWeight { level: u64, size: String },
    #[error("search for {what} exceeded ceiling {ceiling}")]
    SearchCeilingExceeded { what: String, ceiling: u64 },
    #[error("system carries only a partial sum, no certified tail")]
    NoCertifiedTail,
    #[error("block {block} has ratio {ratio} which is not below c = {c}")]
    RatioNotBelowC { block: u64, ratio: String, c: String },
    #[error("weight function has no supermultiplicativity certificate")]
    MissingSupermultiplicativeCertificate,
    #[error("enumeration of {what} exceeds ceiling {ceiling}")]
    LedgerOverflowCeiling { what: String, ceiling: u64 },
    #[error("interval [{start}, {end}) out of range for word of length {len}")]
    OutOfRange { start: u64, end: u64, len: u64 },
    #[error("level {level} would be assigned twice")]
    IndexingConflict { level: u64 },
    #[error("pigeonhole failed at stage {stage}: {detail}")]
    HypothesisViolated { stage: u64, detail: String },
    #[error("plan depth {depth} exhausted at stage {stage}")]
    DepthExhausted { stage: u64, depth: u64 },
    #[error("ratio decay below 1/(k 2^k) not reached for k = {k} within ceiling")]
    RatioDecayTooSlow { k: u64 },
    #[error("sets are not almost disjoint: {0}")]
    NotAlmostDisjoint(String),
    #[error("weight function is not strictly increasing: {0}")]
    NotIncreasing(String),
    #[error("construction branch not applicable: {0}")]
    CaseNotApplicable(String),
    #[error("no avoiding pattern exists for super-block {k}")]
    CounterexampleSearchFailed { k: u64 },
    #[error("rule has no limsup certificate: {0}")]
    NoLimsupCertificate(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

impl Error {
    /// Machine-readable name printed by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DivisionByZeroWeight { .. } => "DivisionByZeroWeight",
            Error::SearchCeilingExceeded { .. } => "SearchCeilingExceeded",
            Error::NoCertifiedTail => "NoCertifiedTail",
            Error::RatioNotBelowC { .. } => "RatioNotBelowC",
            Error::MissingSupermultiplicativeCertificate => "MissingSupermultiplicativeCertificate",
            Error::LedgerOverflowCeiling { .. } => "LedgerOverflowCeiling",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::IndexingConflict { .. } => "IndexingConflict",
            Error::HypothesisViolated { .. } => "HypothesisViolated",
            Error::DepthExhausted { .. } => "DepthExhausted",
            Error::RatioDecayTooSlow { .. } => "RatioDecayTooSlow",
            Error::NotAlmostDisjoint(_) => "NotAlmostDisjoint",
            Error::NotIncreasing(_) => "NotIncreasing",
            Error::CaseNotApplicable(_) => "CaseNotApplicable",
            Error::CounterexampleSearchFailed { .. } => "CounterexampleSearchFailed",
            Error::NoLimsupCertificate(_) => "NoLimsupCertificate",
            Error::PreconditionFailed(_) => "PreconditionFailed",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
            Error::VerificationFailed(_) => "VerificationFailed",
        }
    }

    /// 2 precondition, 3 search ceiling, 4 verification failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SearchCeilingExceeded { .. }
            | Error::LedgerOverflowCeiling { .. }
            | Error::RatioDecayTooSlow { .. } => 3,
            Error::VerificationFailed(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
