use thiserror::Error;

/// Errors raised by model construction, mechanisms and tuning.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("ad index {index} out of range for {n_ads} ads")]
    IndexOutOfRange { index: usize, n_ads: usize },

    #[error("impossible event: {0}")]
    ImpossibleEvent(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("infeasible parameters: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(what: &str, p: f64) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} = {p} is not a probability")))
    }
}
