use thiserror::Error;

use crate::state::PrimState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A state lies outside the admissible domain of the equation of state.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("primitive recovery did not converge after {iterations} iterations (residual {residual:.3e})")]
    RecoveryFailed {
        iterations: usize,
        residual: f64,
        last: Box<PrimState>,
    },

    #[error("singular Jacobian in {0}")]
    SingularJacobian(&'static str),

    #[error("main-field chart inversion failed: {0}")]
    ChartInversion(String),

    #[error("covector {0:?} is not timelike")]
    NotTimelike([f64; 4]),

    #[error("degenerate characteristic pencil: {0}")]
    PencilDegenerate(String),

    #[error("step failed in cell {cell}: {source}")]
    Cell {
        cell: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}
