use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} outside the admissible range [{min}, {max}]")]
    Range {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Newton iteration for Legendre root {root} of order {order} did not converge")]
    QuadratureNewton { root: usize, order: usize },

    #[error("matrix is singular: zero pivot at elimination step {step}")]
    Singular { step: usize },

    #[error("matrix is not square ({rows} x {cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("Newton iteration diverged; residual trace {trace:?}")]
    NewtonDivergence { trace: Vec<f64> },

    #[error("Newton iteration produced u = {value} < 0 at x = {x} (wrong solution branch)")]
    WrongBranch { x: f64, value: f64 },

    #[error("ODE step size underflow at lambda = {re} + {im}i")]
    Stiffness { re: f64, im: f64 },

    #[error("numerical integrity violated: {0}")]
    Integrity(String),

    #[error("need at least {needed} samples, got {got}")]
    Arity { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(what: &'static str, value: f64, min: f64, max: f64) -> Result<()> {
    if value.is_nan() || value < min || value > max {
        return Err(Error::Range {
            what,
            value,
            min,
            max,
        });
    }
    Ok(())
}
