//! Grids, quadrature and the finite-difference eigenproblem.

mod eigen;
mod grid;
mod quadrature;

pub use eigen::{
    discretize, lowest_eigenvalues, Boundary, Edge, EigenOptions, GeneralizedEigenProblem,
    SparseSym, Spectrum,
};
pub use grid::{Field2D, Grid2D};
pub use quadrature::quadrature;
