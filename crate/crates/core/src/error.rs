use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("escape rate did not certify tolerance {tol:e} within {iterations} iterations")]
    NonConvergence { iterations: usize, tol: f64 },

    #[error("gamma series cannot be certified for lambda = {0}")]
    GammaDivergence(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("orbit relation f^{n}(c) = f^{m}(c) vanishes identically")]
    DegenerateRelation { n: u32, m: u32 },

    #[error("root solver stalled: max residual {max_residual:e} after {iterations} sweeps")]
    SolverStall {
        max_residual: f64,
        iterations: usize,
        best_effort: Box<crate::pcf::RootSet>,
    },

    #[error("lambda = {0} is a root of unity other than 1")]
    RootOfUnity(String),

    #[error("p-adic precision exhausted at p = {prime} (last precision {digits} digits)")]
    PrecisionExhausted { prime: String, digits: u32 },

    #[error("points coincide in the projective line")]
    CoincidentPoints,

    #[error("cross-check failed: {0}")]
    CrossCheckFailed(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
