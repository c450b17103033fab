use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid Gaussian scale alpha = {0} (must be > 0)")]
    InvalidScale(f64),
    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("invalid derivative order {0} (expected 1 or 2)")]
    InvalidOrder(u8),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "eigensolver did not converge (dim = {dim}, frobenius norm = {norm:.6e}, max asymmetry = {asymmetry:.3e})"
    )]
    EigenFailure { dim: usize, norm: f64, asymmetry: f64 },
    #[error("level ordering changes across the finite-difference stencil at level {level} (t = {t}, delta = {delta})")]
    StencilCrossing { level: usize, t: f64, delta: f64 },
    #[error("near-degeneracy: gap {gap:.3e} between levels {level} and {} at t = {t} is below the floor {floor:.3e}", level + 1)]
    NearDegeneracy { level: usize, gap: f64, floor: f64, t: f64 },
    #[error("level {level} at E = {energy} lies within the edge margin of the support radius {radius}")]
    EdgeProximity { level: usize, energy: f64, radius: f64 },

    #[error("empty batch")]
    EmptyBatch,
    #[error("mean squared unfolded velocity is zero")]
    ZeroVelocityVariance,
    #[error("all rescaled curvatures are zero")]
    DegenerateBatch,
    #[error("rescaled curvature missing on sample {0}; run rescale_batch first")]
    MissingRescale(usize),

    #[error("invalid histogram edges: {0}")]
    InvalidEdges(String),
    #[error("histogram has no in-range samples; density is undefined")]
    EmptyHistogram,
    #[error("invalid gamma {0} (must be > 0)")]
    InvalidGamma(f64),
    #[error("need at least {needed} non-empty bins, found {found}")]
    InsufficientBins { needed: usize, found: usize },
    #[error("objective minimum lies on the bracket boundary [{lo}, {hi}] at gamma = {at}")]
    NoMinimumInBracket { lo: f64, hi: f64, at: f64 },
    #[error("insufficient tail data: {0}")]
    InsufficientTailData(String),
    #[error("empty input")]
    EmptyInput,

    #[error("{path}, line {line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 validation, 2 runtime/numerical, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            InvalidDimension(_)
            | InvalidScale(_)
            | InvalidCoupling(_)
            | OutOfRange(_)
            | InvalidOrder(_)
            | InvalidParameter(_)
            | InvalidEdges(_)
            | InvalidGamma(_)
            | Parse { .. }
            | Config(_) => 1,
            Io { .. } => 3,
            _ => 2,
        }
    }
}
