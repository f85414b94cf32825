use std::fmt;

use thiserror::Error;

/// One violated input invariant, carrying the offending field.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// The exponent sits on one of the poles of the coefficient formulas.
    ForbiddenExponent { m: f64 },
    /// A coefficient that appears in a denominator is (numerically) zero.
    ZeroCoefficient { field: &'static str, value: f64 },
    /// Both inverse widths vanish.
    ZeroWidth { omega1: f64, omega2: f64 },
    /// `1 + 2m + 4k(1+m)τ₀` vanishes.
    DegenerateUpsilon { upsilon: f64 },
    NonFinite { field: &'static str },
}

impl Violation {
    pub fn field(&self) -> &'static str {
        match self {
            Violation::ForbiddenExponent { .. } => "m",
            Violation::ZeroCoefficient { field, .. } => field,
            Violation::ZeroWidth { .. } => "omega1,omega2",
            Violation::DegenerateUpsilon { .. } => "tau0",
            Violation::NonFinite { field } => field,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ForbiddenExponent { m } => write!(f, "m ∈ {{0,−1,−1/2}} (m = {m})"),
            Violation::ZeroCoefficient { field, value } => write!(f, "{field} = 0 ({value:e})"),
            Violation::ZeroWidth { omega1, omega2 } => {
                write!(f, "omega1² + omega2² = 0 (omega1 = {omega1}, omega2 = {omega2})")
            }
            Violation::DegenerateUpsilon { upsilon } => write!(f, "Υ = 0 ({upsilon:e})"),
            Violation::NonFinite { field } => write!(f, "{field} is not finite"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", join(.0))]
    InvalidParams(Vec<Violation>),

    #[error("amplitude is not real: radicand {radicand:e}")]
    NonRealAmplitude { radicand: f64 },

    #[error("unsupported root pattern: {0}")]
    UnsupportedPattern(String),

    #[error("ambiguous root clustering at tolerance {tol:e}")]
    AmbiguousClustering { tol: f64 },

    #[error("argument outside the function domain: {0}")]
    DomainError(String),

    #[error("singular point at eta = {eta} (margin {margin:e})")]
    SingularPoint { eta: f64, margin: f64 },

    #[error("solution is not degenerate: {0}")]
    NotDegenerate(String),

    #[error("all {n_points} grid points were excluded")]
    AllPointsSingular { n_points: usize },

    #[error("integrator step collapsed to {step:e} at eta = {eta}")]
    StiffnessFailure { eta: f64, step: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::NonRealAmplitude { .. } => "NonRealAmplitude",
            Error::UnsupportedPattern(_) => "UnsupportedPattern",
            Error::AmbiguousClustering { .. } => "AmbiguousClustering",
            Error::DomainError(_) => "DomainError",
            Error::SingularPoint { .. } => "SingularPoint",
            Error::NotDegenerate(_) => "NotDegenerate",
            Error::AllPointsSingular { .. } => "AllPointsSingular",
            Error::StiffnessFailure { .. } => "StiffnessFailure",
            Error::Config(_) => "Config",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }

    /// Module that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) | Error::NonRealAmplitude { .. } => "params",
            Error::UnsupportedPattern(_) | Error::AmbiguousClustering { .. } => "quartic",
            Error::DomainError(_) => "special",
            Error::SingularPoint { .. } | Error::NotDegenerate(_) => "families",
            Error::AllPointsSingular { .. } | Error::StiffnessFailure { .. } => "verify",
            Error::Config(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => "cli",
        }
    }

    /// True for input/configuration problems as opposed to numeric failures.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidParams(_) | Error::Config(_) | Error::Json(_))
    }
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
