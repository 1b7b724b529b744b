use crate::linalg::LinalgError;

/// Errors raised by plant construction, synthesis and simulation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("Bessel functions are evaluated for x > 0 only, got x = {0}")]
    BesselDomain(f64),
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("root scan for angular order {m} found {found} of {wanted} roots below k = {k_max}")]
    BracketFailure {
        m: usize,
        found: usize,
        wanted: usize,
        k_max: f64,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i*omega = {omega}i (index {index}) lies in the spectrum of the stabilized plant")]
    Resonance { index: usize, omega: f64 },
    #[error("target y_{index} is not in the range of P_s(i*omega_{index}): residual {residual:e}")]
    RangeViolation { index: usize, residual: f64 },
    #[error("P_s(i*omega_{index}) vanishes numerically; no admissible direction exists")]
    ZeroTransfer { index: usize },
    #[error(
        "projected transfer function at frequency {index} is not surjective: \
         sigma_min / sigma_max = {ratio:e}"
    )]
    RankDeficient { index: usize, ratio: f64 },
    #[error("window {window} must not exceed the horizon {t_end} and must be a multiple of dt = {dt}")]
    InvalidWindow { window: f64, t_end: f64, dt: f64 },
    #[error("state norm {norm:e} exceeded the growth cap {cap:e} at t = {t}")]
    StateGrowth { norm: f64, cap: f64, t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
