use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("operands belong to different quaternion algebras")]
    MismatchedAlgebra,
    #[error("zero has no inverse")]
    ZeroInverse,
    #[error("not a division algebra: nonzero element {0} has reduced norm 0")]
    NotDivisionAlgebra(String),
    #[error("invalid algebra parameters: {0}")]
    InvalidAlgebra(String),
    #[error("singular matrix")]
    SingularMatrix,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("index out of range or degenerate: {0}")]
    InvalidIndex(String),
    #[error("singular twisted system x - p x q = r")]
    SingularTwisted,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("internal invariant breached: {0}")]
    Internal(String),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("parse error: {0}")]
    Parse(String),
}
