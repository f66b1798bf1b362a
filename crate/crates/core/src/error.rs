use thiserror::Error;

/// Errors raised by metric validation and the magnitude computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("distance matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("a metric space needs at least one point")]
    EmptySpace,
    #[error("non-finite value at ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("distance matrix is not symmetric: d({i},{j}) != d({j},{i})")]
    AsymmetricInput { i: usize, j: usize },
    #[error("negative distance d({i},{j})")]
    NegativeDistance { i: usize, j: usize },
    #[error("nonzero self-distance d({i},{i})")]
    NonzeroDiagonal { i: usize },
    #[error("distinct points {i} and {j} are at distance zero")]
    ZeroOffDiagonal { i: usize, j: usize },
    #[error("triangle inequality fails: d({i},{k}) exceeds d({i},{j}) + d({j},{k}) by {excess:e}")]
    TriangleViolation {
        i: usize,
        j: usize,
        k: usize,
        excess: f64,
    },
    #[error("points {i} and {j} coincide")]
    DuplicatePoint { i: usize, j: usize },
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("scale factor must be positive and finite, got {0}")]
    NonpositiveScale(f64),
    #[error("subset is empty")]
    EmptySubset,
    #[error("index {index} out of range for a space with {n} points")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("point {0} is not part of the current subspace")]
    NotAMember(usize),
    #[error("the weighting equation has no solution; magnitude does not exist")]
    NoSolution,
    #[error("similarity matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("similarity matrix is singular")]
    SingularZ,
    #[error("magnitude is zero")]
    ZeroMagnitude,
    #[error("points are not affinely independent")]
    DegenerateSimplex,
    #[error("pivot block of the Schur complement is singular")]
    SingularPivotBlock,
    #[error("cannot delete the last remaining point")]
    LastPoint,
    #[error("no strongly positive definite scale found up to t = {t_max}")]
    ThresholdNotFound { t_max: f64 },
    #[error("{n} points exceed the exhaustive subset limit of {max}")]
    TooManyPoints { n: usize, max: usize },
    #[error("remainder n - |tX| underflows")]
    DegenerateRemainder,
    #[error("invalid scale grid: {0}")]
    InvalidGrid(String),
    #[error("unknown reproduction target `{0}`")]
    UnknownTarget(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Malformed input or arguments, as opposed to a magnitude quantity that
    /// does not exist or a hypothesis that fails for a valid space.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NotSquare { .. }
                | Error::EmptySpace
                | Error::NonFinite { .. }
                | Error::AsymmetricInput { .. }
                | Error::NegativeDistance { .. }
                | Error::NonzeroDiagonal { .. }
                | Error::ZeroOffDiagonal { .. }
                | Error::TriangleViolation { .. }
                | Error::DuplicatePoint { .. }
                | Error::DimensionMismatch { .. }
                | Error::NonpositiveScale(_)
                | Error::EmptySubset
                | Error::IndexOutOfRange { .. }
                | Error::NotAMember(_)
                | Error::InvalidGrid(_)
                | Error::UnknownTarget(_)
                | Error::Parse(_)
        )
    }

    /// Variant name, used as a stable key in structured diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "NotSquare",
            Error::EmptySpace => "EmptySpace",
            Error::NonFinite { .. } => "NonFinite",
            Error::AsymmetricInput { .. } => "AsymmetricInput",
            Error::NegativeDistance { .. } => "NegativeDistance",
            Error::NonzeroDiagonal { .. } => "NonzeroDiagonal",
            Error::ZeroOffDiagonal { .. } => "ZeroOffDiagonal",
            Error::TriangleViolation { .. } => "TriangleViolation",
            Error::DuplicatePoint { .. } => "DuplicatePoint",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonpositiveScale(_) => "NonpositiveScale",
            Error::EmptySubset => "EmptySubset",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::NotAMember(_) => "NotAMember",
            Error::NoSolution => "NoSolution",
            Error::NotPositiveDefinite => "NotPositiveDefinite",
            Error::SingularZ => "SingularZ",
            Error::ZeroMagnitude => "ZeroMagnitude",
            Error::DegenerateSimplex => "DegenerateSimplex",
            Error::SingularPivotBlock => "SingularPivotBlock",
            Error::LastPoint => "LastPoint",
            Error::ThresholdNotFound { .. } => "ThresholdNotFound",
            Error::TooManyPoints { .. } => "TooManyPoints",
            Error::DegenerateRemainder => "DegenerateRemainder",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::UnknownTarget(_) => "UnknownTarget",
            Error::Parse(_) => "Parse",
        }
    }
}
