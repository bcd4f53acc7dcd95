use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// One problem found while validating an experiment config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    /// Dotted key path, e.g. `grid.h`.
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the domain of the integrand")]
    Domain { point: Vec<f64> },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numerical failure in {routine}: {detail}")]
    Numerical { routine: &'static str, detail: String },

    #[error("ball centered at {center:?} with radius {radius} contains no grid node")]
    EmptyBall { center: Vec<f64>, radius: f64 },

    #[error("conjugate appears unbounded at t = {t} (objective still increasing at s = {s_cap})")]
    UnboundedConjugate { t: f64, s_cap: f64 },

    #[error("bound is undefined for the zero field")]
    UndefinedBound,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("invalid config:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Validation(Vec<ValidationIssue>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn numerical(routine: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            routine,
            detail: detail.into(),
        }
    }

    /// True for failures of an iterative numerical routine (exit code 3 in the CLI).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. } | Error::UnboundedConjugate { .. })
    }
}
