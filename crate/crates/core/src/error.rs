use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("evaluation at a pole of the Green function (E = {re} {im:+}i)")]
    PoleEvaluation { re: f64, im: f64 },

    #[error("no interior minimum found in [{lo}, {hi}]")]
    NotFound { lo: f64, hi: f64 },

    #[error(
        "time window too small: output edge amplitude {edge:.3e} of peak exceeds {limit:.0e} \
         (increase the window)"
    )]
    WindowTooSmall { edge: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
