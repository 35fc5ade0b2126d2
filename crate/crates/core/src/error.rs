use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point ({u}, {v}) is outside the domain of the {map} map")]
    OutsideDomain { map: &'static str, u: f64, v: f64 },

    #[error("point ({u}, {v}) is a singular point of the {map} map")]
    Singular { map: &'static str, u: f64, v: f64 },

    #[error("degenerate point ({u}, {v}): scale factor vanishes")]
    Degenerate { u: f64, v: f64 },

    #[error("Hermite order {0} is beyond the validated range (max {max})", max = crate::oscillator::HERMITE_MAX_ORDER)]
    HermiteRange(u32),

    #[error("index {index} out of range 0..={max}")]
    IndexRange { index: usize, max: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("{count} degenerate node(s) inside the grid, first at {first:?}")]
    DegenerateNodes {
        count: usize,
        first: (usize, usize),
        nodes: Vec<(usize, usize)>,
    },

    #[error("boundary conditions incompatible with grid: {0}")]
    Boundary(String),

    #[error("matrix is not positive definite at row {0}")]
    NotPositiveDefinite(usize),

    #[error("eigensolver did not converge; best residuals {residuals:?}")]
    NoConvergence { residuals: Vec<f64> },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
