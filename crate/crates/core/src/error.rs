use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("non-finite entries in {0}")]
    NonFinite(&'static str),

    #[error("matrix columns are not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("invalid subspace dimension: need 1 <= r < n, got n={n}, r={r}")]
    InvalidRank { n: usize, r: usize },

    #[error("rank {requested} exceeds min(n, n_T) = {max}")]
    RankTooLarge { requested: usize, max: usize },

    #[error("target is at or beyond the cut locus (largest principal angle {max_angle:.12})")]
    CutLocus { max_angle: f64 },

    #[error("projection of target onto base is singular")]
    SingularProjection,

    #[error("embedded vector norm {norm:.12} lies outside the injectivity ball")]
    OutOfChart { norm: f64 },

    #[error("vector norm {norm:.12} exceeds the chart radius")]
    BallViolation { norm: f64 },

    #[error("no training basis works as chart reference; offending samples: {offending:?}")]
    NoFeasibleReference { offending: Vec<usize> },

    #[error("leaf QCQP did not converge after {iterations} iterations (gap {gap:e})")]
    SolverFailure { iterations: usize, gap: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("interpolation needs at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("solver instability: {0}")]
    Instability(String),

    #[error("CFL condition violated: dt={dt} > h/sqrt(2)={limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("snapshot matrix has zero norm")]
    ZeroNorm,

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn shape_mismatch(
    context: &'static str,
    expected: (usize, usize),
    found: (usize, usize),
) -> Error {
    Error::DimensionMismatch {
        context,
        expected: format!("{}x{}", expected.0, expected.1),
        found: format!("{}x{}", found.0, found.1),
    }
}
