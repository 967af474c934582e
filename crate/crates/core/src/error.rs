use thiserror::Error;

/// Errors raised by the estimation pipeline and the special functions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside the domain of {func}")]
    Domain {
        func: &'static str,
        name: &'static str,
        value: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not Hermitian (relative asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("steering matrix is rank deficient: columns {0} and {1} are nearly collinear")]
    RankDeficient(usize, usize),

    #[error("moment of order {order} is undefined for shape {shape}")]
    MomentUndefined { order: u32, shape: u64 },

    #[error("spectrum curve is empty")]
    EmptyCurve,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(func: &'static str, name: &'static str, value: f64) -> Error {
    Error::Domain { func, name, value }
}
