use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed graph document: {0}")]
    Malformed(String),

    #[error("edge `{edge}` has a nonpositive or non-finite length")]
    BadLength { edge: String },

    #[error("edge `{edge}` references unknown vertex `{vertex}`")]
    DanglingEndpoint { edge: String, vertex: String },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("invalid physical parameters: mass and light speed must be positive and finite")]
    BadParams,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("Weyl block has a pole on edge `{edge}` (cos(l k(z)) = 0)")]
    Pole { edge: String },

    #[error("z = {z} is a branch point of k(z)")]
    BranchPoint { z: f64 },

    #[error("kernel empty: smallest relative singular value {sigma_min:.3e}")]
    KernelEmpty { sigma_min: f64 },

    #[error("contour crosses cut")]
    ContourCrossesCut,

    #[error("contour touches a pole or a zero of the secular function")]
    ContourTouchesPole,

    #[error("discretization: {0}")]
    Discretization(String),

    #[error("operation requires a compact graph (no half-lines)")]
    NonCompact,

    #[error("theta must lie strictly between 0 and 1")]
    ThetaOutOfRange,

    #[error("eigenvalue near {target} lost between refinements")]
    EigenvalueLost { target: f64 },

    #[error("eigen-decomposition carries no eigenvectors")]
    MissingDecomposition,

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
