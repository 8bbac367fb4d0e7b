use thiserror::Error;

/// Structured failures of tensor operations.
#[derive(Debug, Error)]
pub enum TensorError {
    /// Operand shapes are inconsistent with the operation's contract.
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },

    /// A parameter is outside its documented domain.
    #[error("invalid argument to {context}: {message}")]
    InvalidArgument { context: &'static str, message: String },

    /// An operation produced or received a non-finite value.
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },
}
