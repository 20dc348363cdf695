use thiserror::Error;

use crate::lattice::ModelKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("link {link} takes value {value}, outside the spin-1 truncation")]
    TruncationViolation { link: usize, value: i32 },

    #[error("expected a {expected:?} basis, got {found:?}")]
    ModelMismatch { expected: ModelKind, found: ModelKind },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid subsystem: ell = {ell} on N = {sites} (need 1 <= ell <= N - 2)")]
    InvalidSubsystem { ell: usize, sites: usize },

    #[error("no eigendecomposition for sector {0:?}")]
    MissingSector(Vec<i32>),

    #[error("seed configuration is not in the basis of sector {0:?}")]
    SeedAbsent(Vec<i32>),

    #[error("invalid initial state: {0}")]
    InvalidInitialState(String),

    #[error("eigensolver did not converge for a {0}x{0} matrix")]
    EigenConvergence(usize),

    #[error("density matrix has eigenvalue {0:e} below tolerance")]
    InvalidState(f64),

    #[error("only {found} samples inside the averaging window (need {needed})")]
    TooFewSamples { found: usize, needed: usize },

    #[error("time grids differ")]
    GridMismatch,

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("operation not supported for {0:?}")]
    UnsupportedModel(ModelKind),

    #[error("config error at line {line}: {field}: {message}")]
    Config {
        line: usize,
        field: String,
        message: String,
    },

    #[error("sector dimension {dim} exceeds the cap {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            field: field.into(),
            message: message.into(),
        }
    }
}
