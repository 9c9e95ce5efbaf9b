use num_complex::Complex64;
use thiserror::Error;

/// Every failure the library can report.
///
/// [`Error::is_config`] separates user-input problems from numerical ones,
/// which the CLI maps to different exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("beta entry {beta:e} is below tolerance {tol:e}")]
    SingularBeta { beta: f64, tol: f64 },
    #[error("upper-left block {value:e} is below tolerance {tol:e}")]
    SingularBlock { value: f64, tol: f64 },
    #[error("matrix is not in U(1,1): defect {defect:e}")]
    NotU11 { defect: f64 },
    #[error("{what} is not unitary: defect {defect:e}")]
    NonUnitary { what: String, defect: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid site choice: {0}")]
    InvalidSiteChoice(String),
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("assumption (A1) fails at level {level}: channel modes are disconnected inside the shell")]
    A1Failure { level: usize },
    #[error("assumption (A2) fails at level {level}: coupling entry b vanishes")]
    A2Failure { level: usize },
    #[error("exceptional point at level {level}, z = {z}")]
    ExceptionalPoint { level: usize, z: Complex64 },
    #[error("resolvent is numerically singular (condition estimate {cond:e})")]
    SingularResolvent { cond: f64 },
    #[error("eigensolver failure: {0}")]
    EigensolverFailure(String),
    #[error("dimension {dim} exceeds the dense limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },
    #[error("discriminant has imaginary part {imag:e}")]
    NonRealDiscriminant { imag: f64 },
    #[error("band set is empty")]
    EmptyBandSet,
    #[error("angle {phi} is too close to a band edge (discriminant {disc})")]
    NearBandEdge { phi: f64, disc: f64 },
    #[error("(C3) violated at level {level} after 100 resamples")]
    C3Violation { level: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by malformed or inadmissible input.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::ShapeMismatch(_)
                | Error::InvalidSiteChoice(_)
                | Error::IndexOutOfRange { .. }
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
