use thiserror::Error;

/// Errors raised by every module of the crate.
///
/// Variants map one-to-one onto the CLI exit classes: `Truncation` is the
/// only inconclusive outcome, `Invariant` signals an internal failure, and
/// everything else is a precondition or input problem.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("guard exceeded: {what} is {actual}, limit {limit}")]
    Guard { what: &'static str, actual: usize, limit: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("group oracle error: {0}")]
    Oracle(String),
    #[error("truncation inconclusive: {0}")]
    Truncation(String),
    #[error("generator extraction left {} weight-bounded cut(s) uncovered", uncovered.len())]
    Generation { uncovered: Vec<Vec<String>> },
    #[error("invariant failure: {0}")]
    Invariant(String),
}

impl Error {
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn truncation(msg: impl Into<String>) -> Self {
        Error::Truncation(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Multiplier applied to enumeration guards, read from `CUTFOREST_GUARD_SCALE`.
pub fn guard_scale() -> usize {
    std::env::var("CUTFOREST_GUARD_SCALE")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&s| s >= 1)
        .unwrap_or(1)
}

pub(crate) fn check_guard(what: &'static str, actual: usize, base_limit: usize) -> Result<()> {
    let limit = base_limit.saturating_mul(guard_scale());
    if actual > limit {
        Err(Error::Guard { what, actual, limit })
    } else {
        Ok(())
    }
}
