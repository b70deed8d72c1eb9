use thiserror::Error;

/// Errors raised by the deconvolution pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error in {module}: {message}")]
    Config {
        module: &'static str,
        message: String,
    },
    #[error("kernel is ill-posed: g_m(u_l) = 0 at profile l = {profile}, frequency m = {frequency}")]
    IllPosedKernel { profile: usize, frequency: i64 },
    #[error("need at least {needed} usable frequencies to estimate nu, got {got}")]
    InsufficientRange { needed: usize, got: usize },
    #[error("level j = {level} is below the coarsest level {coarsest}")]
    LevelTooCoarse { level: u32, coarsest: u32 },
    #[error("level j = {level} needs frequencies up to {max_frequency}, beyond the Nyquist bound of N = {n}")]
    LevelTooFine {
        level: u32,
        max_frequency: i64,
        n: usize,
    },
    #[error("index error in {module}: {message}")]
    Index {
        module: &'static str,
        message: String,
    },
    #[error("numerical error in {module}: {message}")]
    Numerical {
        module: &'static str,
        message: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn config(module: &'static str, message: impl Into<String>) -> Self {
        Error::Config {
            module,
            message: message.into(),
        }
    }

    pub(crate) fn index(module: &'static str, message: impl Into<String>) -> Self {
        Error::Index {
            module,
            message: message.into(),
        }
    }

    pub(crate) fn numerical(module: &'static str, message: impl Into<String>) -> Self {
        Error::Numerical {
            module,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
