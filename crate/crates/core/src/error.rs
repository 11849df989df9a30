use serde::Serialize;
use thiserror::Error;

/// A single violated admissibility condition, with the sample point where it
/// was first observed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum ThetaViolation {
    /// `c_{-k}` is not the conjugate of `c_k` (or `c_0` is not real).
    Symmetry { k: i64, detail: String },
    /// θ(x) ≤ 0.
    Positivity { x: f64, value: f64 },
    /// θ'(x) > α θ(x).
    Growth { x: f64, derivative: f64, bound: f64 },
    /// Parameter out of range (α, c or a non-finite coefficient).
    Domain { detail: String },
}

impl std::fmt::Display for ThetaViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ThetaViolation::Symmetry { k, detail } => {
                write!(f, "SymmetryError at k={k}: {detail}")
            }
            ThetaViolation::Positivity { x, value } => {
                write!(f, "PositivityError: theta({x}) = {value} <= 0")
            }
            ThetaViolation::Growth {
                x,
                derivative,
                bound,
            } => write!(
                f,
                "GrowthError: theta'({x}) = {derivative} exceeds alpha*theta = {bound}"
            ),
            ThetaViolation::Domain { detail } => write!(f, "DomainError: {detail}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("gamma pole: {0} is within tolerance of a nonpositive integer")]
    Pole(String),
    #[error("branch error: (±ix)^z undefined at x = 0 with Re z = {0} <= 0")]
    Branch(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("theta rejected: {}", format_violations(.0))]
    Rejected(Vec<ThetaViolation>),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("divergent integral: {0}")]
    Divergence(String),
    #[error("instability detected at step {step}: {detail}")]
    Instability { step: usize, detail: String },
    #[error("sign rule violated: {0}")]
    Sign(String),
    #[error("decay precondition violated: {0}")]
    Decay(String),
    #[error("diagnostics window error: {0}")]
    Window(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("range error: {0}")]
    Range(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_violations(v: &[ThetaViolation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    /// Short error class name used in machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Pole(_) => "PoleError",
            Error::Branch(_) => "BranchError",
            Error::Domain(_) => "DomainError",
            Error::Regime(_) => "RegimeError",
            Error::Rejected(_) => "ThetaRejected",
            Error::Quadrature(_) => "QuadratureError",
            Error::Divergence(_) => "DivergenceError",
            Error::Instability { .. } => "InstabilityError",
            Error::Sign(_) => "SignError",
            Error::Decay(_) => "DecayError",
            Error::Window(_) => "WindowError",
            Error::Parse(_) => "ParseError",
            Error::Range(_) => "RangeError",
            Error::Io(_) => "IoError",
            Error::Json(_) => "JsonError",
        }
    }

    /// True for failures of a numerical procedure, as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature(_)
                | Error::Divergence(_)
                | Error::Instability { .. }
                | Error::Decay(_)
                | Error::Pole(_)
                | Error::Branch(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
