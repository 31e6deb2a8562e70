use thiserror::Error;

/// Errors produced by the exact pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero vector has no primitive normalization")]
    ZeroVector,
    #[error("generators are rank deficient: expected rank {expected}, found {found}")]
    RankDeficient { expected: usize, found: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("shape mismatch at layer {layer}: {detail}")]
    ShapeMismatch { layer: usize, detail: String },
    #[error("neuron ({layer}, {index}) does not exist in this architecture")]
    BadNeuronId { layer: usize, index: usize },
    #[error("network is not shallow (it has {hidden} hidden layers)")]
    NotShallow { hidden: usize },
    #[error("network has nonzero biases")]
    Biased,
    #[error("hyperplane normals span only dimension {rank} of {dim}")]
    NotEssential { rank: usize, dim: usize },
    #[error("sample points in cone {cone} are not in general position")]
    SingularSample { cone: usize },
    #[error("slopes are discontinuous across wall {wall}")]
    ContinuityViolation { wall: usize },
    #[error("ray {ray} receives inconsistent values from its incident cones")]
    InconsistentRayValue { ray: usize },
    #[error("divisor is not Q-Cartier on cone {cone}")]
    NotQCartier { cone: usize },
    #[error("function is not convex, so it has no Newton polytope")]
    NotConvexFunction,
    #[error("polytope has non-integral vertices")]
    NotLatticePolytope,
    #[error("function is not positively homogeneous: {0}")]
    NotHomogeneous(String),
    #[error("shallow realizability criterion failed")]
    CriterionFailed,
    #[error("fans live in different ambient dimensions")]
    FanMismatch,
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unknown variable `{name}` at byte {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("constant term {value} breaks homogeneity at byte {offset}")]
    InhomogeneousConstant { value: String, offset: usize },
    #[error("only 2-dimensional fans can be rendered, got dimension {0}")]
    UnsupportedDimension(usize),
    #[error("invalid fan: {0}")]
    InvalidFan(String),
}

pub type Result<T> = std::result::Result<T, Error>;
