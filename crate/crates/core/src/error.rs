use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid boundary state: {0}")]
    InvalidBoundary(String),

    #[error("point outside the domain of the field: {0}")]
    DomainError(String),

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("defective matrix: repeated eigenvalue {0} without a full eigenbasis")]
    DefectiveMatrix(f64),

    #[error("complex eigenvalues (discriminant {0})")]
    ComplexEigenvalues(f64),

    #[error("newton iteration for the slow graph diverged at x = {0}")]
    NewtonDiverged(f64),

    #[error("leading order of the reduced field is ambiguous (fitted exponent {exponent})")]
    FitAmbiguous { exponent: f64 },

    #[error("step size underflow at xi = {xi} (h = {h})")]
    StepUnderflow { xi: f64, h: f64 },

    #[error("vector field returned a non-finite value at xi = {0}")]
    NonFinite(f64),

    #[error("trace of {curve} failed: {reason}")]
    TraceFailed { curve: &'static str, reason: String },

    #[error("unexpected terminal for {curve}: expected {expected}, got {got}")]
    UnexpectedTerminal {
        curve: &'static str,
        expected: &'static str,
        got: String,
    },

    #[error("query parameter {value} outside the traced range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("profile left the tube around the traced curve (deviation {0})")]
    ProfileDiverged(f64),

    #[error("decay tail too short: {0} samples")]
    TailTooShort(usize),

    #[error("{0}")]
    Io(String),
}

impl Error {
    /// Variant name, for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::InvalidBoundary(_) => "InvalidBoundary",
            Error::DomainError(_) => "DomainError",
            Error::RegimeMismatch(_) => "RegimeMismatch",
            Error::DefectiveMatrix(_) => "DefectiveMatrix",
            Error::ComplexEigenvalues(_) => "ComplexEigenvalues",
            Error::NewtonDiverged(_) => "NewtonDiverged",
            Error::FitAmbiguous { .. } => "FitAmbiguous",
            Error::StepUnderflow { .. } => "StepUnderflow",
            Error::NonFinite(_) => "NonFinite",
            Error::TraceFailed { .. } => "TraceFailed",
            Error::UnexpectedTerminal { .. } => "UnexpectedTerminal",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::ProfileDiverged(_) => "ProfileDiverged",
            Error::TailTooShort(_) => "TailTooShort",
            Error::Io(_) => "Io",
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
