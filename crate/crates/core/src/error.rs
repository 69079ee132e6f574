use thiserror::Error;

/// Errors raised by the simulation kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |m - m†| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("matrix has a negative eigenvalue {min:e}")]
    NegativeSpectrum { min: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("{name} = {value} is out of range ({expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid noise parameters: {0}")]
    InvalidParams(String),

    #[error("operation not supported for the {0} family")]
    UnsupportedFamily(&'static str),

    #[error("Kraus set is not complete (max |Σ K†K - I| = {defect:e})")]
    IncompleteKraus { defect: f64 },

    #[error("not a density matrix: {0}")]
    InvalidState(String),

    #[error("post-selection success probability {prob:e} is below the floor{}", at_time(.t))]
    SuccessProbTooSmall { prob: f64, t: Option<f64> },

    #[error("correlation matrix is not symmetric (max |T - Tᵀ| = {defect:e})")]
    AsymmetricCorrelation { defect: f64 },

    #[error("derivative step dt = {dt} exceeds the limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("invalid time bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

fn at_time(t: &Option<f64>) -> String {
    match t {
        Some(t) => format!(" at t = {t}"),
        None => String::new(),
    }
}

impl Error {
    /// Attach the offending time to a post-selection failure.
    pub fn at(self, time: f64) -> Self {
        match self {
            Error::SuccessProbTooSmall { prob, .. } => Error::SuccessProbTooSmall {
                prob,
                t: Some(time),
            },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
