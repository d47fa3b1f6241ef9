use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not a subgradient of the nuclear norm (defect {defect:e})")]
    NotASubgradient { defect: f64 },

    #[error("argument lies outside the domain of the conjugate: {0}")]
    Domain(String),

    #[error("point is not a KKT point (residual {residual:e})")]
    NotAKktPoint { residual: f64 },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
