use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no centers")]
    NoCenters,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point set is empty")]
    EmptySet,
    #[error("invalid weight {0}: weights must be finite and nonnegative")]
    InvalidWeight(f64),
    #[error("non-finite coordinate in point {0}")]
    NonFiniteCoordinate(usize),
    #[error("total weight is zero")]
    ZeroWeight,
    #[error("simplex needs at least 2 vectors, got {0}")]
    SimplexTooSmall(usize),
    #[error("k = {k} exceeds the number of distinct points ({distinct})")]
    KExceedsPoints { k: usize, distinct: usize },
    #[error("exhausted: every point is already a center")]
    Exhausted,
    #[error("rule violation: rule `{rule}` returned candidate {index} out of {ell}")]
    RuleViolation {
        rule: String,
        index: usize,
        ell: usize,
    },
    #[error("budget exceeded: {required} {what} required, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        required: u128,
        budget: u128,
    },
    #[error("this quantity is defined for unit weights only")]
    NonUnitWeights,
    #[error("degenerate: K fully covered")]
    DegenerateCovered,
    #[error("t = {0:.4} < 1: increase ℓ·log k or override t")]
    TooSmallT(f64),
    #[error("construction check failed: {0}")]
    ConstructionCheck(String),
    #[error("adversary increased weight of element {element} from {old} to {new}")]
    WeightIncrease { element: usize, old: f64, new: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
