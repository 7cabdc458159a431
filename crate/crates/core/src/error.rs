use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input: at least one coordinate is required")]
    EmptyInput,

    #[error("delta must lie in (0, 1/2), got {0}")]
    DeltaOutOfRange(f64),

    #[error("singular point: the two-variable kernel is not differentiable at (0, 0)")]
    SingularPoint,

    #[error("dimension {n} exceeds the cap of {cap}")]
    DimensionTooLarge { n: usize, cap: usize },

    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("bad dimension {n}: need n >= {min}")]
    BadDimension { n: usize, min: usize },

    #[error("alpha {alpha} must be below 1/(n-2) = {limit} for n = {n}")]
    AlphaTooLarge { n: usize, alpha: f64, limit: f64 },

    #[error("empty domain: beta {beta} exceeds {beta_max} (beta_max for n = {n}, alpha = {alpha})")]
    EmptyDomain {
        n: usize,
        alpha: f64,
        beta: f64,
        beta_max: f64,
    },

    #[error("sampler starved after {draws} consecutive rejected draws")]
    SamplerStarved { draws: u64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("step {step} too large: translator residual {residual:e} exceeds {limit:e}")]
    StepTooLarge {
        step: f64,
        residual: f64,
        limit: f64,
    },

    #[error("x1 = {0} is outside (-pi/2, pi/2)")]
    OutOfDomain(f64),

    #[error("grid too short: {nodes} nodes, need at least {min}")]
    GridTooShort { nodes: usize, min: usize },

    #[error("curvature tuple at r = {r} leaves the admissible cone")]
    DomainViolation { r: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
