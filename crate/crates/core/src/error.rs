use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error taxonomy for the whole crate. The CLI maps these onto exit codes:
/// parse failures -> 2, precondition violations -> 3, internal verification
/// failures -> 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no k-th root of unity: {0}")]
    NoRootOfUnity(String),
    #[error("k is not invertible: {0}")]
    KNotInvertible(String),
    #[error("no k-th root in the ring: {0}")]
    RootNotInRing(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("matrix is not coherent: {0}")]
    NotCoherent(String),
    #[error("matrices are not conjugate: {0}")]
    NotConjugate(String),
    #[error("degenerate block parameters: {0}")]
    DegenerateBlock(String),
    #[error("scalar input where a nonscalar matrix is required")]
    ScalarInput,
    #[error("eigenvalue one: the corner block must not fix a vector")]
    EigenvalueOne,
    #[error("k too small: {0}")]
    KTooSmall(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal verification failure (this is a bug): {0}")]
    Internal(String),
}

impl Error {
    /// Exit code class used by the CLI and the FFI layer.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::Internal(_) => 4,
            _ => 3,
        }
    }
}
