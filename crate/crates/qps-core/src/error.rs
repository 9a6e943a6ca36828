//! Shared error type for the whole crate.

/// Crate-wide error enum. Per-cell sweep errors are recorded in the cell
/// status field instead of aborting, so most variants surface only from the
/// direct per-operation APIs.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Model parameters violate a family invariant (e.g. |alpha| >= 1 for GPS).
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Phase fell inside the guard band around a potential singularity.
    #[error("singular phase: {0}")]
    SingularPhase(String),

    /// Argument outside an operation's stated precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Imaginary phase offset outside the model's analyticity strip.
    #[error("strip violation: {0}")]
    StripViolation(String),

    /// Iterative refinement exceeded its iteration cap.
    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),

    /// Energy is (numerically) an eigenvalue of the finite truncation.
    #[error("resolvent singular: {0}")]
    ResolventSingular(String),

    /// Requested bound does not exist (tan^2 potential is unbounded).
    #[error("spectrum unbounded: {0}")]
    Unbounded(String),

    /// No finite mobility edge for these parameters (alpha = 0 or lambda = 0).
    #[error("degenerate edge: {0}")]
    DegenerateEdge(String),

    /// Localization length requested at a point with non-positive Lyapunov exponent.
    #[error("not localized: {0}")]
    NotLocalized(String),

    /// Decay-rate fit had too few usable sites.
    #[error("fit failure: {0}")]
    FitFailure(String),

    /// Input vector is not unit-norm.
    #[error("not normalized: {0}")]
    NotNormalized(String),

    /// Every state in the sample classified as Unresolved.
    #[error("no resolved states")]
    NoResolvedStates,

    /// Sweep configuration rejected before execution.
    #[error("invalid config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable kind tag, used for per-cell status fields.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidModel(_) => "invalid-model",
            Error::SingularPhase(_) => "singular-phase",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::StripViolation(_) => "strip-violation",
            Error::ConvergenceFailure(_) => "convergence-failure",
            Error::ResolventSingular(_) => "resolvent-singular",
            Error::Unbounded(_) => "unbounded",
            Error::DegenerateEdge(_) => "degenerate-edge",
            Error::NotLocalized(_) => "not-localized",
            Error::FitFailure(_) => "fit-failure",
            Error::NotNormalized(_) => "not-normalized",
            Error::NoResolvedStates => "no-resolved-states",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Serialize(_) => "serialize",
        }
    }
}
