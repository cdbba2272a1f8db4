use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("state is not normalizable at t = {t}: Im(alpha) = {im_alpha}")]
    NonNormalizable { t: f64, im_alpha: f64 },

    #[error("overflow guard tripped at t = {t}: {quantity} reached {value:e}")]
    Overflow { t: f64, quantity: &'static str, value: f64 },

    /// The Riccati flow for the shape parameter hits a pole.
    #[error("shape parameter is singular at t = {pole_time}")]
    SingularState { pole_time: f64 },

    #[error("grid cannot resolve the state: {0}")]
    Resolution(String),

    #[error("wave function reaches the grid boundary at t = {t} (edge/max = {ratio:e})")]
    Boundary { t: f64, ratio: f64 },

    #[error("split-step instability at t = {t}: norm drift {drift:e} in one step")]
    Instability { t: f64, drift: f64 },

    #[error("initial wave function has zero norm on the grid")]
    ZeroNorm,

    #[error("trajectory {index} left the field domain at t = {t} (x = {x})")]
    TrajectoryExit { index: usize, t: f64, x: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
