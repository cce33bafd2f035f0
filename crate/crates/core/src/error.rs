use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no particles")]
    NoParticles,

    #[error("non-finite particle state at index {index}")]
    NonFiniteParticle { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("time {t} is past blowup (T* = {t_star})")]
    PastBlowup { t: f64, t_star: f64 },

    #[error("characteristic inversion failed at t = {t}, x = {x}")]
    InversionFailed { t: f64, x: f64 },

    #[error("velocity guard tripped at t = {t}: max |v| = {max_v} exceeds {bound}")]
    VelocityGuard { t: f64, max_v: f64, bound: f64 },
}
