use thiserror::Error;

/// Which Weyl wall a singular type vector lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wall {
    /// λ₁ = λ₂: the attracting line is ambiguous.
    Line,
    /// λ₂ = λ₃: the attracting plane is ambiguous.
    Plane,
    /// Both pairings vanish.
    Origin,
}

impl std::fmt::Display for Wall {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Wall::Line => write!(f, "line wall (a1 = 0)"),
            Wall::Plane => write!(f, "plane wall (a2 = 0)"),
            Wall::Origin => write!(f, "origin (a1 = a2 = 0)"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinates do not sum to zero")]
    InvalidVector,
    #[error("zero type vector")]
    ZeroVector,
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("singular matrix")]
    SingularMatrix,
    #[error("matrix does not have determinant 1")]
    NotInGroup,
    #[error("type is not regular: {0}")]
    NonRegularType(Wall),
    #[error("direction or flag is not regular")]
    NonRegular,
    #[error("chamber does not contain the panel-tree vertex")]
    NotInResidue,
    #[error("invalid end set: {0}")]
    InvalidEndSet(&'static str),
    #[error("epsilon must lie in (0, 1/2)")]
    InvalidEpsilon,
    #[error("empty measure")]
    EmptyMeasure,
    #[error("measure needs at least three distinct atoms")]
    TooFewAtoms,
    #[error("depth must be at least 1")]
    InvalidDepth,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
