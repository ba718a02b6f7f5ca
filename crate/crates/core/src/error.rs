use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// `HHᴴ` is numerically singular; the caller should draw a new channel.
    #[error("channel Gram matrix is numerically singular (condition estimate {condition:.3e})")]
    SingularChannel { condition: f64 },

    #[error("converter input has zero power")]
    ZeroPowerInput,

    #[error("rate-loss budget {budget} bits/s/Hz is infeasible: {reason}")]
    InfeasibleBudget { budget: f64, reason: String },

    #[error("malformed codebook table: {0}")]
    Codebook(String),

    #[error("trial {trial} failed after {completed} completed trials: {source}")]
    TrialFailed {
        trial: usize,
        completed: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
