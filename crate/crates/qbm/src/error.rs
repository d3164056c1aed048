//! Error type shared by every module in the crate.

/// Crate-wide error type.
///
/// Variants map onto the CLI exit-code contract: `Config` and `Domain` are
/// caller mistakes, `Convergence` and `Resolution` are numerical failures,
/// `Capability` marks a request outside the supported problem size.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Invalid model or bath construction parameters.
    #[error("configuration: {0}")]
    Config(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain: {0}")]
    Domain(String),

    /// The secular function was evaluated exactly at a bath pole.
    #[error("secular function pole at alpha = {alpha}")]
    SecularPole { alpha: f64 },

    /// An iterative scheme failed to reach its tolerance.
    #[error("no convergence: {0}")]
    Convergence(String),

    /// An oscillatory integral was requested beyond the panel budget.
    #[error("t = {t} exceeds the oscillatory resolution budget (max resolvable t = {t_max})")]
    Resolution { t: f64, t_max: f64 },

    /// Problem size beyond the supported range.
    #[error("capability: {0}")]
    Capability(String),

    /// A least-squares fit did not meet its quality gate.
    #[error("fit rejected: R^2 = {r_squared} below required {minimum}")]
    FitRejected { r_squared: f64, minimum: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
