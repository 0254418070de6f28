use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice basis is degenerate or negatively oriented (det = {0:e})")]
    DegenerateLattice(f64),

    #[error("linear part does not map the domain lattice into the target lattice")]
    NotHomomorphism,

    #[error("linear part is singular but a diffeomorphism class was requested")]
    SingularClass,

    #[error("grid resolution {n1}x{n2} is below the minimum of 4 per direction")]
    Resolution { n1: usize, n2: usize },

    #[error("degenerate jacobian: {0}")]
    Degenerate(&'static str),

    #[error("jacobian is not orientation preserving (det = {0:e})")]
    Orientation(f64),

    #[error("initial map is not a diffeomorphism (min det Du = {min_det:e})")]
    NotDiffeomorphism { min_det: f64 },

    #[error("invalid jet: {0}")]
    InvalidJet(&'static str),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("malformed field dump: {0}")]
    Dump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
