//! Two-dimensional position-dependent-mass systems with the spectrum of the
//! anisotropic harmonic oscillator.
//!
//! A conformal map `x = f(u, v)`, `y = g(u, v)` carries the oscillator to a
//! system with mass `M = m0 h²` and the same energies. The crate evaluates
//! the maps, the transformed eigenfunctions and SU(2) coherent densities,
//! the magnetic variant, and checks isospectrality numerically.

pub mod coherent;
pub mod error;
pub mod magnetic;
pub mod oscillator;
pub mod pdm;
pub mod spectra;
pub mod transform;

pub use error::{Error, Result};
