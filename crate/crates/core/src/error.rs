use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("point ({x}, {y}) is not a grid node")]
    OffGrid { x: f64, y: f64 },

    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: usize, limit: usize },

    #[error("unknown superpotential family `{0}`")]
    UnknownSuperpotential(String),

    #[error("invalid superpotential parameters: {0}")]
    Parameters(String),

    #[error("superpotential violates chi(0) = 0 on axis {axis}: chi(0) = {value:e}")]
    Normalization { axis: usize, value: f64 },

    #[error("degenerate generating pair: Im(conj(F) G) vanishes at node ({ix}, {iy})")]
    DegeneratePair { ix: usize, iy: usize },

    #[error(
        "compatibility defect {defect:e} at node ({ix}, {iy}) exceeds the hard cap {cap:e}"
    )]
    Compatibility {
        defect: f64,
        cap: f64,
        ix: usize,
        iy: usize,
    },

    #[error("precondition failed: {what} residual {residual:e} exceeds {cap:e}")]
    Precondition {
        what: String,
        residual: f64,
        cap: f64,
    },

    #[error("Goursat iteration did not converge in {iterations} iterations (last defect {last:e})")]
    NonConvergence { iterations: usize, last: f64, history: Vec<f64> },

    #[error("transmutation cross-check failed: representations differ by {difference:e} (cap {cap:e})")]
    CrossCheck { difference: f64, cap: f64 },

    #[error("rank-deficient basis, singular values {singular_values:?}")]
    RankDeficient { singular_values: Vec<f64> },

    #[error("Taylor coefficient {order} is dominated by stencil noise ({noise:e}); refine the grid")]
    NoiseTooLarge { order: usize, noise: f64 },

    #[error("{0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
