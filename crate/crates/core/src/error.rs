use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix dimensions do not match: {0}")]
    DimensionMismatch(String),
    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("eigenvalue iteration did not converge within {iterations} sweeps")]
    IterationLimit { iterations: usize },
    #[error("right-hand side is not in the range of the matrix (relative residual {residual:e})")]
    Inconsistent { residual: f64 },

    #[error("mesh must have at least one node")]
    ZeroSize,
    #[error("empty step list")]
    EmptyInput,
    #[error("step {index} is not positive ({value})")]
    NonPositiveStep { index: usize, value: f64 },
    #[error("alternating mesh needs an even node count, got {0}")]
    OddN(usize),
    #[error("xi must lie in [0, 1), got {0}")]
    XiOutOfRange(f64),
    #[error("mesh structure is invalid: {0}")]
    InvalidStructure(String),
    #[error("mesh functions live on different meshes ({left} vs {right} nodes)")]
    MeshMismatch { left: usize, right: usize },

    #[error("polynomial degree must be even, got {0}")]
    OddP(usize),
    #[error("reconstruction moment matrix is singular")]
    SingularStencil,
    #[error("unknown scheme '{0}'")]
    UnknownScheme(String),
    #[error("scheme '{0}' has no dissipation in the fitted range")]
    NoDissipation(String),

    #[error("number of values {len} is not divisible by the block size {block}")]
    SizeNotDivisible { len: usize, block: usize },

    #[error("eigenvalue branch is ambiguous at phi = {phi}")]
    BranchAmbiguity { phi: f64 },
    #[error("correction system is inconsistent (relative residual {residual:e})")]
    InconsistentCorrection { residual: f64 },
    #[error("invalid argument: {0}")]
    BadArgument(String),

    #[error("solution blew up at t = {time} (norm ratio {ratio:e})")]
    UnstableBlowup { time: f64, ratio: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
