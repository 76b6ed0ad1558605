use thiserror::Error;

/// Errors produced by the library.
///
/// Every fallible operation reports exactly one of these variants; the CLI
/// maps them onto exit codes and machine-readable JSON.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("box side {index} is {value}, must be strictly positive")]
    NonPositiveSide { index: usize, value: f64 },

    #[error("dimension {d} too small, need d >= 2")]
    DimensionTooSmall { d: usize },

    #[error("fractional order {ell} outside the admitted range (1/2, 1)")]
    OrderOutOfRange { ell: f64 },

    #[error("coordinate index {i} out of range for dimension {d}")]
    IndexOutOfRange { i: usize, d: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero mode carries no coefficient (the mean of the potential is fixed to zero)")]
    ZeroModeForbidden,

    #[error("entry {0:?} is not a canonical orbit representative (negative component)")]
    NonCanonicalRepresentative(Vec<i64>),

    #[error("evaluation point lies outside the box")]
    PointOutsideBox,

    #[error("scale r = {r} too small, need r > 1")]
    ScaleTooSmall { r: f64 },

    #[error("resonance test set is empty (ball radius {radius} below the smallest nonzero lattice norm)")]
    EmptyTestSet { radius: f64 },

    #[error("grid has {cells} cells, exceeding the cap of {cap}")]
    GridTooLarge { cells: usize, cap: usize },

    #[error("vanishing denominator at stage {stage} for tuple {tuple:?}")]
    VanishingDenominator { stage: usize, tuple: Vec<Vec<i64>> },

    #[error("series depth {j} outside the admitted range 1..={max}")]
    DepthOutOfRange { j: i64, max: i64 },

    #[error("no eigenvalue found in the window |xi - |beta|^2l| < {halfwidth}")]
    NoEigenvalueInWindow { halfwidth: f64 },

    #[error("no matched eigenpair available for the requested mode")]
    NoMatchedEigenpair,

    #[error("basis would hold {count} modes, exceeding the cap of {cap}")]
    BasisTooLarge { count: usize, cap: usize },

    #[error("eigensolver failed to converge: {0}")]
    ConvergenceFailure(String),

    #[error("malformed potential file at line {line}: {msg}")]
    PotentialFormat { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
