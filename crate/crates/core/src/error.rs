use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error(
        "precision unreachable: requested eta={requested:.3e}, synthesizer floor is {floor:.3e} \
         (best error found {best:.3e})"
    )]
    PrecisionUnreachable { requested: f64, floor: f64, best: f64 },

    #[error("empty batch")]
    EmptyBatch,

    #[error("qubit cap exceeded: {required} qubits required, cap is {cap}")]
    QubitCapExceeded { required: usize, cap: usize },

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("zero per-swap cost term: the optimal batch count is unbounded")]
    UnboundedOptimum,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}
