use thiserror::Error;

/// Errors surfaced by the library.
///
/// `Config` covers invalid inputs and violated preconditions, `Capability`
/// covers requests that exceed a configured backend limit (oversized tile,
/// distance beyond the memoized radius), and `Numerical` covers failures of
/// the numerical machinery itself.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("capability exceeded: {0}")]
    Capability(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn is_capability(&self) -> bool {
        matches!(self, Error::Capability(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
