use thiserror::Error;

/// Dimensions saturate at `usize::MAX` when the count overflows.
struct DimDisplay(usize);

impl core::fmt::Display for DimDisplay {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.0 == usize::MAX { f.write_str("beyond usize::MAX") } else { write!(f, "{}", self.0) }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum Error {
    #[error(
        "Fock space with {modes} modes and cutoff {cutoff} has dimension {}, above the limit {limit}",
        DimDisplay(*.dim)
    )]
    DimensionLimit { modes: usize, cutoff: usize, dim: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mode count mismatch: expected {expected}, found {found}")]
    ModeMismatch { expected: usize, found: usize },

    #[error("degree {degree} exceeds the cutoff {cutoff}")]
    DegreeAboveCutoff { degree: usize, cutoff: usize },

    #[error(
        "quadrature domain too small: |F^-1 phi| reaches {boundary:.3e} on the boundary (peak {peak:.3e})"
    )]
    QuadratureDomain { boundary: f64, peak: f64 },

    #[error("characteristic function grid too small: |chi| reaches {boundary:.3e} on the boundary")]
    GridTooSmall { boundary: f64 },

    #[error("direction pairs are singular: |det A| = {det:.3e}")]
    SingularDirections { det: f64 },

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid state: {0}")]
    InvalidState(&'static str),

    #[error("direction k1 + i k2 vanishes")]
    DegenerateDirection,

    #[error("{n} directions requested, at most {max} supported")]
    TooManyDirections { n: usize, max: usize },

    #[error("process is not adapted: bin {bin} fails to commute with mode {mode}")]
    NotAdapted { bin: usize, mode: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
