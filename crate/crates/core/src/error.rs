//! Error type shared across the crate.

use crate::variational::SolveResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{kind} expects {expected} parameters, got {got}")]
    ParamCount {
        kind: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("exponential decay rate must be positive, got {0}")]
    NonPositiveAlpha(f64),

    #[error("confinement radius must be positive and finite, got {0}")]
    InvalidRadius(f64),

    #[error("integrand evaluated to a non-finite value at (s={s}, t={t}, u={u})")]
    NonFiniteIntegrand { s: f64, t: f64, u: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error(
        "quadrature did not converge: order {order} vs {doubled} differ by {rel_diff:.3e} (tol {tol:.1e})"
    )]
    QuadratureNotConverged {
        order: usize,
        doubled: usize,
        rel_diff: f64,
        tol: f64,
    },

    #[error("no optimizer start converged (best energy {energy})", energy = best.energy)]
    SolverFailed { best: Box<SolveResult> },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
