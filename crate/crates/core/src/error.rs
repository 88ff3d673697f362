use thiserror::Error;

/// Failure modes of the toolkit.
///
/// Variants split into two families: configuration/validation problems
/// (bad input, caller error) and numerical failures (a computation that was
/// well posed did not meet its own contract). [`Error::is_numerical`] tells
/// them apart; the CLI maps the two families onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("configuration: {0}")]
    Config(String),

    #[error("degree {degree} exceeds the cap of {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("arnoldi breakdown at degree {degree}: new vector norm {norm:e}")]
    Breakdown { degree: usize, norm: f64 },

    #[error("gram residual {residual:e} above threshold {threshold:e} (n = {n})")]
    GramResidual { n: usize, residual: f64, threshold: f64 },

    #[error("irls: {0}")]
    Irls(String),

    #[error("linear solve: {0}")]
    LinearSolve(String),

    #[error("root finding: {0}")]
    Roots(String),

    #[error("newton inversion failed at z = {re} + {im}i (residual {residual:e})")]
    Newton { re: f64, im: f64, residual: f64 },

    #[error("reference map: {0}")]
    Reference(String),

    #[error("{stage} (domain {domain}, n = {n}, p = {p}): {source}")]
    Sweep {
        stage: &'static str,
        domain: String,
        n: usize,
        p: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for failures of a numerical computation, false for input errors.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Breakdown { .. }
            | Error::GramResidual { .. }
            | Error::Irls(_)
            | Error::LinearSolve(_)
            | Error::Roots(_)
            | Error::Newton { .. } => true,
            Error::Sweep { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    /// Short stage tag used in machine-greppable failure lines.
    pub fn stage(&self) -> &'static str {
        match self {
            Error::InvalidDomain(_) => "domain",
            Error::InvalidParameter(_) | Error::LengthMismatch { .. } => "parameter",
            Error::Config(_) | Error::Json(_) => "config",
            Error::Io(_) => "io",
            Error::DegreeCap { .. } => "polyops",
            Error::Breakdown { .. } | Error::GramResidual { .. } => "ortho",
            Error::Irls(_) | Error::LinearSolve(_) => "extremal",
            Error::Roots(_) => "roots",
            Error::Newton { .. } | Error::Reference(_) => "oracle",
            Error::Sweep { stage, .. } => stage,
        }
    }

    pub(crate) fn in_sweep(self, stage: &'static str, domain: &str, n: usize, p: f64) -> Self {
        Error::Sweep {
            stage,
            domain: domain.to_string(),
            n,
            p,
            source: Box::new(self),
        }
    }
}
