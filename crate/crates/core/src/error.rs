use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not unitary: ||U^H U - I||_F = {defect:.3e} exceeds {tolerance:.3e}")]
    NotUnitary { defect: f64, tolerance: f64 },

    #[error("matrix is not skew-Hermitian: ||H + H^H||_F = {defect:.3e}")]
    NotSkewHermitian { defect: f64 },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("group order exceeds max_order = {max_order} (reached {reached} elements)")]
    OrderExceeded { max_order: usize, reached: usize },

    #[error(
        "dedup ambiguity: candidate lies {distance:.3e} from a stored element, inside the \
         forbidden band (1e-6, 1e-4); tolerance regime has collapsed"
    )]
    DedupAmbiguity { distance: f64 },

    #[error("imaginary residue {residue:.3e} of a real-valued evaluation exceeds {limit:.3e}")]
    ImaginaryResidue { residue: f64, limit: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("no sign change after {tries} samples (observed values in [{min:.6e}, {max:.6e}]); a zero may not exist on this submanifold")]
    NoBracket { tries: usize, min: f64, max: f64 },

    #[error("zero finder did not converge in {iterations} iterations (bracket width {width:.3e})")]
    NotConverged { iterations: usize, width: f64 },

    #[error("orbit of estimated size {size} exceeds the materialization guard {limit}; use the stabilizer-based size")]
    OrbitTooLarge { size: usize, limit: usize },

    #[error("unsupported file version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
