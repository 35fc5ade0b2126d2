//! Charged particle in a magnetic field, symmetric gauge.
//!
//! A homogeneous field `B0` is removed by a time-dependent rotation of the
//! plane by `α(t)`, leaving an isotropic oscillator of frequency `Ω`. Mapping
//! the plane with a conformal map turns `x∂y - y∂x` into
//! `(m0/M)(R ∂u + S ∂v)` and the field into `B = (B0/2)(∂S/∂u - ∂R/∂v)`.

use crate::error::{Error, Result};
use crate::oscillator::{ModeIndex, OscillatorParams};
use crate::pdm::DEGENERATE_MASS;
use crate::transform::{CoordinateMap, Transformation};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MagneticParams {
    pub b0: f64,
    pub charge: f64,
    /// Trap frequency.
    pub omega: f64,
    pub m0: f64,
    pub hbar: f64,
    /// Integration constant in `α`.
    pub c_phase: f64,
}

impl MagneticParams {
    pub fn new(b0: f64, charge: f64, omega: f64, m0: f64, hbar: f64, c_phase: f64) -> Result<Self> {
        if !(m0 > 0.0 && hbar > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "m0 and hbar must be positive, got m0={m0} hbar={hbar}"
            )));
        }
        if !(omega >= 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be non-negative, got {omega}")));
        }
        if ![b0, charge, omega, m0, hbar, c_phase].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter("magnetic parameters must be finite".into()));
        }
        let p = Self {
            b0,
            charge,
            omega,
            m0,
            hbar,
            c_phase,
        };
        if !(p.effective_frequency() > 0.0) {
            return Err(Error::InvalidParameter(
                "omega and the field cannot both vanish".into(),
            ));
        }
        Ok(p)
    }

    /// `α(t) = -e B0 t / (2 m0) + c`.
    pub fn alpha(&self, t: f64) -> f64 {
        -self.charge * self.b0 * t / (2.0 * self.m0) + self.c_phase
    }

    /// `Ω = sqrt(ω² + e² B0² / (4 m0²))`.
    pub fn effective_frequency(&self) -> f64 {
        let larmor = self.charge * self.b0 / (2.0 * self.m0);
        self.omega.hypot(larmor)
    }

    /// Isotropic oscillator of frequency `Ω` in the rotating frame.
    pub fn rotating_oscillator(&self) -> OscillatorParams {
        let w = self.effective_frequency();
        OscillatorParams {
            m0: self.m0,
            hbar: self.hbar,
            omega1: w,
            omega2: w,
        }
    }

    /// Rotated coordinates `(X1, Y1)` at time `t`.
    pub fn rotate(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let (s, c) = self.alpha(t).sin_cos();
        (c * x + s * y, -s * x + c * y)
    }

    /// `χ_mn(x, y, t)`: oscillator eigenfunction of frequency `Ω` in the
    /// rotated frame.
    pub fn chi(&self, mode: ModeIndex, x: f64, y: f64, t: f64) -> f64 {
        let (x1, y1) = self.rotate(x, y, t);
        self.rotating_oscillator().eigenfunction(mode, x1, y1)
    }
}

/// `χ_mn(f(u, v), g(u, v), t)`.
pub fn magnetic_wavefunction_uv(
    map: &CoordinateMap,
    params: &MagneticParams,
    mode: ModeIndex,
    u: f64,
    v: f64,
    t: f64,
) -> Result<f64> {
    let (x, y) = map.evaluate(u, v)?;
    Ok(params.chi(mode, x, y, t))
}

/// Coefficients of `x∂y - y∂x = (m0/M)(R ∂u + S ∂v)`:
/// `R = -(f f_v + g g_v) sgn J`, `S = (f f_u + g g_u) sgn J`.
pub fn compute_rs(map: &CoordinateMap, u: f64, v: f64) -> Result<(f64, f64)> {
    let (f, g) = map.evaluate(u, v)?;
    let p = map.partials(u, v)?;
    if p.scale_factor() <= DEGENERATE_MASS {
        return Err(Error::Degenerate { u, v });
    }
    let sigma = p.jacobian().signum();
    Ok((-sigma * (f * p.fv + g * p.gv), sigma * (f * p.fu + g * p.gu)))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FieldMethod {
    /// `B0 sgn(J) h²`, which the curl reduces to for harmonic `f`, `g`.
    /// Zero at degenerate points.
    #[default]
    Analytic,
    /// Central differences of [`compute_rs`].
    FiniteDifference,
}

/// `B(u, v) = (B0/2)(∂S/∂u - ∂R/∂v)`.
pub fn field_profile(
    map: &CoordinateMap,
    params: &MagneticParams,
    u: f64,
    v: f64,
    method: FieldMethod,
) -> Result<f64> {
    match method {
        FieldMethod::Analytic => {
            let p = map.partials(u, v)?;
            let h2 = p.scale_factor();
            if h2 <= DEGENERATE_MASS {
                return Ok(0.0);
            }
            Ok(params.b0 * p.jacobian().signum() * h2)
        }
        FieldMethod::FiniteDifference => {
            compute_rs(map, u, v)?;
            let hu = 1e-5 * u.abs().max(1.0);
            let hv = 1e-5 * v.abs().max(1.0);
            let (_, s_p) = compute_rs(map, u + hu, v)?;
            let (_, s_m) = compute_rs(map, u - hu, v)?;
            let (r_p, _) = compute_rs(map, u, v + hv)?;
            let (r_m, _) = compute_rs(map, u, v - hv)?;
            let curl = (s_p - s_m) / (2.0 * hu) - (r_p - r_m) / (2.0 * hv);
            Ok(0.5 * params.b0 * curl)
        }
    }
}
