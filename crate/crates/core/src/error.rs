use thiserror::Error;

/// Every failure mode surfaced by the library.
///
/// Variant names double as the machine-readable error tag in CLI reports,
/// see [`Error::name`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,
    #[error("matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },
    #[error("SVD did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("matrix is zero")]
    ZeroMatrix,
    #[error("rank {k} out of range 1..={max}")]
    BadRank { k: usize, max: usize },
    #[error("singular spectrum: value {value} at or below rank threshold")]
    Singular { value: f64 },
    #[error("columns are not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },
    #[error("beta {beta} outside ({lo}, {hi}]")]
    BadBeta { beta: f64, lo: f64, hi: f64 },
    #[error("sample count must be at least 1")]
    BadSampleCount,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("spectral norm estimate must be positive (got {0})")]
    BadEstimate(f64),
    #[error("condition number {0} is below 1")]
    BadKappa(f64),
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("sketched matrix lost rank ({sketched} < {original})")]
    RankCollapse { sketched: usize, original: usize },
    #[error("power iteration start vector annihilated after {restarts} restarts")]
    DeadStart { restarts: usize },
    #[error("input must have full column rank (rank {rank}, {cols} columns)")]
    RankDeficientInput { rank: usize, cols: usize },
    #[error("invalid matrix spec: {0}")]
    BadSpec(String),
    #[error("bad magic or version in matrix file")]
    BadMagic,
    #[error("matrix file is truncated")]
    TruncatedFile,
    #[error("matrix dimensions overflow ({rows}x{cols})")]
    DimensionOverflow { rows: u64, cols: u64 },
    #[error("malformed matrix file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable variant tag, used in JSON reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonFinite => "NonFinite",
            Error::EmptyMatrix { .. } => "EmptyMatrix",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::ZeroMatrix => "ZeroMatrix",
            Error::BadRank { .. } => "BadRank",
            Error::Singular { .. } => "Singular",
            Error::NotOrthonormal { .. } => "NotOrthonormal",
            Error::BadBeta { .. } => "BadBeta",
            Error::BadSampleCount => "BadSampleCount",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::BadEstimate(_) => "BadEstimate",
            Error::BadKappa(_) => "BadKappa",
            Error::BadParams(_) => "BadParams",
            Error::RankCollapse { .. } => "RankCollapse",
            Error::DeadStart { .. } => "DeadStart",
            Error::RankDeficientInput { .. } => "RankDeficientInput",
            Error::BadSpec(_) => "BadSpec",
            Error::BadMagic => "BadMagic",
            Error::TruncatedFile => "TruncatedFile",
            Error::DimensionOverflow { .. } => "DimensionOverflow",
            Error::Malformed(_) => "Malformed",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
