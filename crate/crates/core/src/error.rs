use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("sharpness test requires s > 1 (got {0})")]
    SharpnessOrder(f64),

    #[error("zero operator")]
    ZeroOperator,

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("underdetermined at index {0}")]
    Underdetermined(usize),

    #[error("truncation too short: {0}")]
    TruncationTooShort(String),

    #[error("invalid growth envelope: {0}")]
    InvalidGrowthEnvelope(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index outside supported range: s = {0} (need 1 < s < 3)")]
    IndexOutOfRange(f64),

    #[error("outside convergence domain b|z|^m < cos[m(eta - arg z)]: {0}")]
    OutsideDomain(String),

    #[error(
        "quadrature did not converge: achieved relative error {achieved:.3e} (target {target:.3e})"
    )]
    QuadratureFailed { achieved: f64, target: f64 },

    #[error("unstable Padé; reduce degrees (condition estimate {0:.3e})")]
    UnstablePade(f64),

    #[error("evaluation failed at z = {re}{im:+}i")]
    Evaluation { re: f64, im: f64 },
}

impl Error {
    /// Domain and convergence failures, as opposed to malformed input or
    /// purely numerical breakdowns.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::OutsideDomain(_)
                | Error::IndexOutOfRange(_)
                | Error::QuadratureFailed { .. }
                | Error::Underdetermined(_)
                | Error::SharpnessOrder(_)
                | Error::InvalidGrowthEnvelope(_)
                | Error::TruncationTooShort(_)
        )
    }
}
