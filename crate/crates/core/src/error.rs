use thiserror::Error;

/// Errors raised by spectrum computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("empty spectrum")]
    EmptySpectrum,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("support escape: window too small for operand support plus shift radius")]
    SupportEscape,
    #[error("nonpositive mass {0}")]
    NonPositiveMass(f64),
    #[error("not translation invariant: coefficient at shift {0:?} is not constant")]
    NotTranslationInvariant(Vec<i64>),
    #[error("symbol is not real-valued (max |Im| = {0:e}); use range_cloud")]
    UseRangeCloud(f64),
    #[error("period mismatch: {0}")]
    PeriodMismatch(String),
    #[error("operator not self-adjoint (Hermitian defect {0:e})")]
    NotSelfAdjoint(f64),
    #[error("sequence bounded: generating sequence does not tend to infinity over the probe range")]
    SequenceBounded,
    #[error("not classifiable: {0}")]
    NotClassifiable(String),
    #[error("envelope violation: [{lo}, {hi}]")]
    InvalidEnvelope { lo: f64, hi: f64 },
    #[error("empty bands")]
    EmptyBands,
    #[error("profile without constant tails: {0}")]
    ProfileWithoutTails(String),
    #[error("invalid two-valued sequences: {0}")]
    InvalidSequences(String),
    #[error("decay violation: |{name}| = {value:e} on the boundary shell exceeds {tol:e}")]
    DecayViolation { name: String, value: f64, tol: f64 },
    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),
    #[error("truncation too large: {0} entries")]
    TruncationTooLarge(usize),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Whether the error stems from a numerical method rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
