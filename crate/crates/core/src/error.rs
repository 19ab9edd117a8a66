use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("FCIDUMP header: {0}")]
    Header(String),
    #[error("FCIDUMP line {line}: {msg}")]
    Integral { line: usize, msg: String },
    #[error("invalid orbital selection: {0}")]
    Orbitals(String),
    #[error("matrix is not orthogonal (residual {0:.3e})")]
    NotOrthogonal(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitIndex { index: usize, n_qubits: usize },
    #[error("gate acts twice on qubit {0}")]
    RepeatedQubit(usize),
    #[error("invalid Pauli character {0:?}")]
    Pauli(char),
    #[error("no shots recorded")]
    EmptyCounts,
    #[error("regularized Newton system stayed singular")]
    SingularHessian,
    #[error("state is outside the pair sector (weight {0:.3e})")]
    NotPairSector(f64),
    #[error("{what} space of dimension {dim} exceeds the limit {limit}")]
    TooLarge {
        what: &'static str,
        dim: usize,
        limit: usize,
    },
    #[error("noisy simulation does not support gate {0}")]
    UnsupportedGate(String),
    #[error("reference geometry {0} not found")]
    MissingReference(String),
    #[error("scan spec: {0}")]
    Spec(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
