use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient pose history: need data back to t = {needed:.4} s, earliest is {earliest:.4} s")]
    InsufficientHistory { needed: f64, earliest: f64 },

    #[error("response did not settle after t = {command_time:.3} s")]
    NotSettled { command_time: f64 },

    #[error("degenerate segment: endpoints closer than 1e-9 m")]
    DegenerateSegment,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
