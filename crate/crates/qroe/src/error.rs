//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains a non-finite entry at ({row},{col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("operator is not a projection (defect {defect:.3e} exceeds tol {tol:.3e})")]
    NotAProjection { defect: f64, tol: f64 },

    #[error("input set is not closed under adjoints (defect {defect:.3e})")]
    NotAdjointClosed { defect: f64 },

    #[error("subspace is not a bimodule over the commutant (defect {defect:.3e})")]
    NotBimodule { defect: f64 },

    #[error("operands belong to different represented algebras")]
    AlgebraMismatch,

    #[error("operation requires a block-form algebra; block data could not be recovered")]
    BlockFormUnavailable,

    #[error("operation requires the canonical diagonal (atomic abelian) algebra")]
    NotDiagonalAlgebra,

    #[error("operation requires an abelian algebra")]
    NotAbelian,

    #[error("operation requires a multiplicity-free block algebra")]
    NotMultiplicityFree,

    #[error("algebra does not contain the commutant; certificate is a commutant element outside the candidate")]
    CommutantNotContained,

    #[error("invalid block data: {0}")]
    InvalidBlocks(String),

    #[error("invalid trace weights: {0}")]
    InvalidWeights(String),

    #[error("not a metric: {0}")]
    InvalidMetric(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid projection pair: {0}")]
    InvalidProjectionPair(String),

    #[error("invalid quantum function: {0}")]
    InvalidQuantumFunction(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("joint support search exhausted after {attempts} attempts")]
    JointSupportSearchFailed { attempts: usize },

    #[error("manifest error at `{path}`: {message}")]
    Manifest { path: String, message: String },
}
