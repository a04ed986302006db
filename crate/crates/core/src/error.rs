use thiserror::Error;

/// Which way a radial string trajectory missed the vacuum `v = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Miss {
    /// `v` crossed zero with positive speed.
    Overshoot,
    /// `v'` reached zero while `v` was still negative.
    Stall,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("{solver} did not converge after {iterations} iterations (last update {last_update:.3e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        last_update: f64,
        trace: Vec<f64>,
    },

    #[error("linear solve residual {residual:.3e} above tolerance {tolerance:.3e}")]
    LinearSolve { residual: f64, tolerance: f64 },

    #[error("MONOTONE_BREAK at iteration {iteration}: max increase {increase:.3e}")]
    MonotoneBreak { iteration: usize, increase: f64 },

    #[error("SANDWICH_BREAK at delta {delta}: violation {violation:.3e} (try a larger beta)")]
    SandwichBreak { delta: f64, violation: f64 },

    #[error("BETA_MISMATCH: {kind:?} at t = {t:.4}, v = {v:.4e}")]
    BetaMismatch { kind: Miss, t: f64, v: f64 },

    #[error("energy identity violated at t = {t:.4}: defect {defect:.3e}")]
    EnergyDrift { t: f64, defect: f64 },

    #[error("quadrature did not reach tolerance: estimate {estimate:.6e}, error {error:.3e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("{0}")]
    Failed(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad input rather than a failed computation.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Precondition(_) | Error::Parse(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
