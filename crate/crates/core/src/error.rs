use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("attitude pitch {pitch} rad is within the Euler singularity guard")]
    SingularAttitude { pitch: f64 },

    #[error("thrust {thrust} N is below the minimum usable thrust")]
    DegenerateThrust { thrust: f64 },

    #[error("recovery window {duration} s is too short")]
    DegenerateWindow { duration: f64 },

    #[error("time {t} s is outside the trajectory window [{start}, {end}]")]
    OutOfWindow { t: f64, start: f64, end: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical divergence at t = {t} s: {what}")]
    NumericalDivergence { t: f64, what: String },

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("log parse error: {0}")]
    LogParse(String),
}
