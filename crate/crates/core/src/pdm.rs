//! Position-dependent-mass systems built from a conformal map and the
//! parent oscillator.
//!
//! Under `x = f(u, v)`, `y = g(u, v)` the oscillator equation becomes
//!
//! ```text
//! -ħ²/(2M) (∂u² + ∂v²) ψ + V(f, g) ψ = E ψ,    M = m0 J² / h² = m0 h²
//! ```
//!
//! so `ψ_mn(f(u, v), g(u, v))` solves the new problem with the parent
//! energies.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oscillator::{ModeIndex, OscillatorParams};
use crate::spectra::Grid2D;
use crate::transform::{CoordinateMap, MapKind, Transformation};

/// Scale factors at or below this (relative to 1) count as degenerate.
pub const DEGENERATE_MASS: f64 = 1e-12;

/// Which expression supplies `M(u, v)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MassForm {
    /// `m0 J² / h²` from the analytic partials.
    #[default]
    Metric,
    /// The closed forms as printed for each family. The elliptic one,
    /// `m0 a² (cos 2v - cosh 2u) / 2`, is negative everywhere; kept to
    /// demonstrate that it breaks the residual check.
    Printed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdmSystem {
    pub map: CoordinateMap,
    pub osc: OscillatorParams,
    pub mass_form: MassForm,
}

impl PdmSystem {
    pub fn new(map: CoordinateMap, osc: OscillatorParams) -> Self {
        Self {
            map,
            osc,
            mass_form: MassForm::Metric,
        }
    }

    pub fn with_mass_form(mut self, form: MassForm) -> Self {
        self.mass_form = form;
        self
    }

    /// `M(u, v)`; zero at degenerate points.
    pub fn mass_at(&self, u: f64, v: f64) -> Result<f64> {
        match self.mass_form {
            MassForm::Metric => {
                let p = self.map.partials(u, v)?;
                let h2 = p.scale_factor();
                if h2 == 0.0 {
                    return Ok(0.0);
                }
                let j = p.jacobian();
                Ok(self.osc.m0 * j * j / h2)
            }
            MassForm::Printed => {
                self.map.evaluate(u, v)?;
                Ok(printed_mass(&self.map, self.osc.m0, u, v))
            }
        }
    }

    /// `M/m0`, the density of `dx dy` with respect to `du dv`.
    pub fn measure_at(&self, u: f64, v: f64) -> Result<f64> {
        Ok(self.mass_at(u, v)? / self.osc.m0)
    }

    pub fn is_degenerate(&self, u: f64, v: f64) -> Result<bool> {
        Ok(self.measure_at(u, v)?.abs() <= DEGENERATE_MASS)
    }

    /// `V(u, v) = ½ m0 [ω1² f² + ω2² g²]`.
    pub fn potential_at(&self, u: f64, v: f64) -> Result<f64> {
        let (x, y) = self.map.evaluate(u, v)?;
        Ok(self.osc.potential(x, y))
    }

    /// `ψ_mn(f(u, v), g(u, v))`.
    pub fn wavefunction_uv(&self, mode: ModeIndex, u: f64, v: f64) -> Result<f64> {
        let (x, y) = self.map.evaluate(u, v)?;
        Ok(self.osc.eigenfunction(mode, x, y))
    }

    pub fn energy(&self, mode: ModeIndex) -> f64 {
        self.osc.energy(mode)
    }

    /// Finite-difference residual of the transformed Schrödinger equation
    /// for `ψ_mn` with the parent energy.
    ///
    /// Uses the 5-point stencil on interior nodes. Nodes where `|ψ|` is
    /// below `1e-6 max|ψ|` are skipped, as are degenerate or singular nodes
    /// (listed in the report).
    pub fn hamiltonian_residual(&self, mode: ModeIndex, grid: &Grid2D) -> Result<ResidualReport> {
        let (nu, nv) = grid.dims();
        let psi: Vec<Option<f64>> = (0..nu)
            .into_par_iter()
            .flat_map_iter(|i| {
                (0..nv).map(move |j| self.wavefunction_uv(mode, grid.u(i), grid.v(j)).ok())
            })
            .collect();
        let at = |i: usize, j: usize| psi[i * nv + j];

        let psi_max = psi.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()));
        let cutoff = 1e-6 * psi_max;
        let e = self.energy(mode);
        let hbar2 = self.osc.hbar * self.osc.hbar;
        let (hu2, hv2) = (grid.hu() * grid.hu(), grid.hv() * grid.hv());

        let rows: Vec<RowStats> = (1..nu - 1)
            .into_par_iter()
            .map(|i| {
                let mut s = RowStats::default();
                let u = grid.u(i);
                for j in 1..nv - 1 {
                    let v = grid.v(j);
                    let stencil = [at(i, j), at(i - 1, j), at(i + 1, j), at(i, j - 1), at(i, j + 1)];
                    let mass = self.mass_at(u, v).ok().filter(|m| {
                        (m / self.osc.m0).abs() > DEGENERATE_MASS
                    });
                    let (Some(c), Some(l), Some(r), Some(d), Some(t), Some(mass)) =
                        (stencil[0], stencil[1], stencil[2], stencil[3], stencil[4], mass)
                    else {
                        s.excluded.push((i, j));
                        continue;
                    };
                    if c.abs() <= cutoff {
                        continue;
                    }
                    let lap = (l - 2.0 * c + r) / hu2 + (d - 2.0 * c + t) / hv2;
                    let pot = match self.potential_at(u, v) {
                        Ok(p) => p,
                        Err(_) => {
                            s.excluded.push((i, j));
                            continue;
                        }
                    };
                    let res = -hbar2 / (2.0 * mass) * lap + pot * c - e * c;
                    s.used += 1;
                    if res.abs() > s.max_abs {
                        s.max_abs = res.abs();
                        s.worst = Some((i, j));
                    }
                    s.max_epsi = s.max_epsi.max((e * c).abs());
                }
                s
            })
            .collect();

        let mut report = ResidualReport {
            mode,
            max_abs: 0.0,
            reference: 0.0,
            relative: 0.0,
            worst: None,
            points_used: 0,
            excluded: Vec::new(),
        };
        for s in rows {
            report.points_used += s.used;
            if s.max_abs > report.max_abs {
                report.max_abs = s.max_abs;
                report.worst = s.worst;
            }
            report.reference = report.reference.max(s.max_epsi);
            report.excluded.extend(s.excluded);
        }
        if report.points_used == 0 {
            return Err(Error::InvalidParameter(format!(
                "no usable interior nodes for residual of mode {mode}"
            )));
        }
        report.relative = report.max_abs / report.reference;
        Ok(report)
    }
}

#[derive(Default)]
struct RowStats {
    used: usize,
    max_abs: f64,
    max_epsi: f64,
    worst: Option<(usize, usize)>,
    excluded: Vec<(usize, usize)>,
}

/// Result of [`PdmSystem::hamiltonian_residual`].
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub mode: ModeIndex,
    /// `max |r|` over the nodes used.
    pub max_abs: f64,
    /// `max |E ψ|` over the nodes used.
    pub reference: f64,
    pub relative: f64,
    pub worst: Option<(usize, usize)>,
    pub points_used: usize,
    /// Interior nodes skipped for degenerate mass or a singular map.
    pub excluded: Vec<(usize, usize)>,
}

impl ResidualReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.relative < tol
    }
}

/// Mass as printed for each family, without the sign correction.
pub fn printed_mass(map: &CoordinateMap, m0: f64, u: f64, v: f64) -> f64 {
    match map.kind() {
        MapKind::Identity => m0,
        MapKind::Polynomial(p) => m0 * (p.c1 * p.c1 + p.c2 * p.c2) * (u * u + v * v),
        MapKind::ParabolicCylinder => m0 * (u * u + v * v),
        MapKind::EllipticCylinder { a } => m0 * a * a * ((2.0 * v).cos() - (2.0 * u).cosh()) / 2.0,
        MapKind::Bipolar { a } => {
            let d = v.cos() - u.cosh();
            m0 * a * a / (d * d)
        }
    }
}
