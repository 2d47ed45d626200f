use thiserror::Error;

/// Errors raised by the spectral routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Fourier coefficients violate reality symmetry (residue {residue:e})")]
    SymmetryViolation { residue: f64 },

    #[error("period mismatch: expected {expected:?}, found {found:?}")]
    PeriodMismatch { expected: Vec<usize>, found: Vec<usize> },

    #[error("quasimomentum component {index} = {value} outside [0, {bound})")]
    RangeViolation { index: usize, value: f64, bound: f64 },

    #[error("eigensolver residual {residual:e} exceeds tolerance{}", node_suffix(.node))]
    ConvergenceFailure { residual: f64, node: Option<Vec<f64>> },

    #[error("no point-of-increase witness at this grid resolution")]
    EmptyResult,

    #[error("box has {sites} sites, limit is {limit}")]
    SizeLimit { sites: usize, limit: usize },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("density ratio {ratio} exceeds bound {bound}")]
    BoundViolation { ratio: f64, bound: f64 },

    #[error("non-finite determinant at sample point {index}")]
    SingularSample { index: usize },

    #[error("both polynomials are identically zero")]
    BothZeroPolys,

    #[error("periods {p} and {q} are not coprime")]
    NotCoprime { p: usize, q: usize },

    #[error("roots do not split by magnitude: {large} large, {small} small, expected {expected} each")]
    PartitionFailure { large: usize, small: usize, expected: usize },

    #[error("spectrum meets the forbidden window ({lower}, {upper})")]
    GapViolation { lower: f64, upper: f64 },

    #[error("potential sup-norm {norm} exceeds {limit}")]
    NormViolation { norm: f64, limit: f64 },

    #[error("overlap margin {margin:e} at stage {stage} is below resolution {resolution:e}")]
    MarginCollapse { stage: usize, margin: f64, resolution: f64 },
}

fn node_suffix(node: &Option<Vec<f64>>) -> String {
    match node {
        Some(theta) => format!(" at theta = {theta:?}"),
        None => String::new(),
    }
}

/// Coarse classification used to map failures onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input or violated precondition.
    Validation,
    /// A checked mathematical statement did not hold.
    Assertion,
    /// The numerics could not deliver a trustworthy answer.
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            InvalidInput(_) | PeriodMismatch { .. } | RangeViolation { .. } | SizeLimit { .. }
            | DomainError(_) | BothZeroPolys | NotCoprime { .. } | NormViolation { .. }
            | SymmetryViolation { .. } => ErrorClass::Validation,
            GapViolation { .. } | BoundViolation { .. } => ErrorClass::Assertion,
            ConvergenceFailure { .. } | EmptyResult | SingularSample { .. }
            | PartitionFailure { .. } | MarginCollapse { .. } => ErrorClass::Numerical,
        }
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        use Error::*;
        match self {
            InvalidInput(_) => "InvalidInput",
            SymmetryViolation { .. } => "SymmetryViolation",
            PeriodMismatch { .. } => "PeriodMismatch",
            RangeViolation { .. } => "RangeViolation",
            ConvergenceFailure { .. } => "ConvergenceFailure",
            EmptyResult => "EmptyResult",
            SizeLimit { .. } => "SizeLimit",
            DomainError(_) => "DomainError",
            BoundViolation { .. } => "BoundViolation",
            SingularSample { .. } => "SingularSample",
            BothZeroPolys => "BothZeroPolys",
            NotCoprime { .. } => "NotCoprime",
            PartitionFailure { .. } => "PartitionFailure",
            GapViolation { .. } => "GapViolation",
            NormViolation { .. } => "NormViolation",
            MarginCollapse { .. } => "MarginCollapse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
