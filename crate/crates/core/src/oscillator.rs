//! The constant-mass 2D anisotropic harmonic oscillator.
//!
//! Eigenfunctions are written with the length scales
//! `X = sqrt(2ħ/(m0 ω1))`, `Y = sqrt(2ħ/(m0 ω2))`:
//!
//! ```text
//! ψ_mn(x, y) = H_m(√2 x/X) H_n(√2 y/Y) exp(-(x/X)² - (y/Y)²)
//!              / sqrt(2^(m+n-1) π m! n! X Y)
//! ```
//!
//! Evaluation goes through normalized Hermite functions so that orders in
//! the hundreds stay finite in double precision.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest order for which [`hermite`] is validated.
pub const HERMITE_MAX_ORDER: u32 = 200;

/// Physicists' Hermite polynomial `H_n(x)` by the three-term recurrence.
pub fn hermite(n: u32, x: f64) -> Result<f64> {
    if n > HERMITE_MAX_ORDER {
        return Err(Error::HermiteRange(n));
    }
    let mut prev = 1.0;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Normalized Hermite functions `H_k(ξ) e^{-ξ²/2} / sqrt(2^k k! √π)` for
/// `k = 0..=max_order`, written into `out`.
///
/// Each function has unit L² norm in `ξ`. The recurrence carries the Gaussian
/// weight so no intermediate value overflows.
pub fn hermite_functions_into(max_order: usize, xi: f64, out: &mut Vec<f64>) {
    out.clear();
    out.reserve(max_order + 1);
    let h0 = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    out.push(h0);
    if max_order == 0 {
        return;
    }
    out.push(std::f64::consts::SQRT_2 * xi * h0);
    for k in 1..max_order {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * xi * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
}

pub fn hermite_functions(max_order: usize, xi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    hermite_functions_into(max_order, xi, &mut out);
    out
}

/// Single normalized Hermite function of order `n`.
pub fn hermite_function(n: usize, xi: f64) -> f64 {
    let mut prev = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    if n == 0 {
        return prev;
    }
    let mut cur = std::f64::consts::SQRT_2 * xi * prev;
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * xi * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Physical constants of the parent oscillator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatorParams {
    pub m0: f64,
    pub hbar: f64,
    pub omega1: f64,
    pub omega2: f64,
}

/// Quantum numbers: `m` pairs with `x`/`ω1`, `n` with `y`/`ω2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    pub m: u32,
    pub n: u32,
}

impl ModeIndex {
    pub fn new(m: u32, n: u32) -> Self {
        Self { m, n }
    }
}

impl std::fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

impl OscillatorParams {
    pub fn new(m0: f64, hbar: f64, omega1: f64, omega2: f64) -> Result<Self> {
        for (name, val) in [("m0", m0), ("hbar", hbar), ("omega1", omega1), ("omega2", omega2)] {
            if !(val > 0.0 && val.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {val}"
                )));
            }
        }
        Ok(Self {
            m0,
            hbar,
            omega1,
            omega2,
        })
    }

    /// `m0 = ħ = 1` with the given frequencies.
    pub fn unit(omega1: f64, omega2: f64) -> Self {
        Self {
            m0: 1.0,
            hbar: 1.0,
            omega1,
            omega2,
        }
    }

    pub fn isotropic(m0: f64, hbar: f64, omega: f64) -> Result<Self> {
        Self::new(m0, hbar, omega, omega)
    }

    /// `X = sqrt(2ħ/(m0 ω1))`.
    pub fn length_x(&self) -> f64 {
        (2.0 * self.hbar / (self.m0 * self.omega1)).sqrt()
    }

    /// `Y = sqrt(2ħ/(m0 ω2))`.
    pub fn length_y(&self) -> f64 {
        (2.0 * self.hbar / (self.m0 * self.omega2)).sqrt()
    }

    pub fn energy(&self, mode: ModeIndex) -> f64 {
        self.hbar * (self.omega1 * (mode.m as f64 + 0.5) + self.omega2 * (mode.n as f64 + 0.5))
    }

    /// `½ m0 (ω1² x² + ω2² y²)`.
    pub fn potential(&self, x: f64, y: f64) -> f64 {
        0.5 * self.m0 * (self.omega1 * self.omega1 * x * x + self.omega2 * self.omega2 * y * y)
    }

    /// Dimensionless coordinates `(√2 x/X, √2 y/Y)`.
    pub fn scaled(&self, x: f64, y: f64) -> (f64, f64) {
        let s = std::f64::consts::SQRT_2;
        (s * x / self.length_x(), s * y / self.length_y())
    }

    /// Factor turning a product of normalized Hermite functions of the scaled
    /// coordinates into a unit-norm function of `(x, y)`.
    pub fn product_norm(&self) -> f64 {
        (2.0 / (self.length_x() * self.length_y())).sqrt()
    }

    /// `ψ_mn(x, y)`.
    pub fn eigenfunction(&self, mode: ModeIndex, x: f64, y: f64) -> f64 {
        let (xi, eta) = self.scaled(x, y);
        self.product_norm() * hermite_function(mode.m as usize, xi) * hermite_function(mode.n as usize, eta)
    }

    /// Closed-form prefactor `[2^(m+n-1) π m! n! X Y]^(-1/2)`, usable for
    /// small orders only.
    pub fn normalization(&self, mode: ModeIndex) -> f64 {
        let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
        let denom = 2f64.powi(mode.m as i32 + mode.n as i32 - 1)
            * PI
            * fact(mode.m)
            * fact(mode.n)
            * self.length_x()
            * self.length_y();
        denom.sqrt().recip()
    }
}
