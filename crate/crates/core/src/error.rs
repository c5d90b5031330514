use thiserror::Error;

/// Failure modes shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of the operation
    /// (support too large, radius beyond the sampled window, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// The caller combined parameters that the operation does not accept.
    #[error("usage error: {0}")]
    Usage(String),
    /// The lattice is too coarse for the requested scale or dilation.
    #[error("resolution error: {0}")]
    Resolution(String),
    /// Two grid functions do not live on the same lattice.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    /// An experiment produced too little usable data to report a result.
    #[error("experiment error: {0}")]
    Experiment(String),
    /// The requested computation exceeds the supported problem size.
    #[error("resource error: {0}")]
    Resource(String),
}

impl Error {
    /// Short machine-readable tag for the error category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Usage(_) => "usage",
            Error::Resolution(_) => "resolution",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::Experiment(_) => "experiment",
            Error::Resource(_) => "resource",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
