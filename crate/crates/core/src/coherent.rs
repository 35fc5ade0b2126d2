//! SU(2) coherent superpositions of degenerate oscillator modes,
//!
//! ```text
//! Φ = (1 + |τ|²)^(-L/2) Σ_K sqrt(C(L, K)) τ^K ψ_{m(K) n(K)},   τ = A e^{iφ}
//! ```
//!
//! with `ω1 = q`, `ω2 = p`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::magnetic::MagneticParams;
use crate::oscillator::{hermite_functions_into, ModeIndex, OscillatorParams};
use crate::pdm::PdmSystem;
use crate::spectra::{Field2D, Grid2D};
use crate::transform::{CoordinateMap, Transformation};

/// How `K` picks the pair of quantum numbers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ModeAssignment {
    /// `m = p(L-K)`, `n = qK`: all terms share one energy.
    #[default]
    Degenerate,
    /// `m = q(L-K)`, `n = pK`, degenerate only for `p = q`.
    Printed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentSpec {
    pub p: u32,
    pub q: u32,
    pub l: u32,
    /// `|τ|`.
    pub amplitude: f64,
    /// `arg τ`.
    pub phase: f64,
    pub assignment: ModeAssignment,
}

impl CoherentSpec {
    /// Phase `π/2`, degenerate assignment.
    pub fn new(p: u32, q: u32, l: u32, amplitude: f64) -> Result<Self> {
        if p == 0 || q == 0 || l == 0 {
            return Err(Error::InvalidParameter(format!(
                "p, q and L must be positive, got p={p} q={q} L={l}"
            )));
        }
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "amplitude must be non-negative, got {amplitude}"
            )));
        }
        Ok(Self {
            p,
            q,
            l,
            amplitude,
            phase: std::f64::consts::FRAC_PI_2,
            assignment: ModeAssignment::Degenerate,
        })
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_assignment(mut self, assignment: ModeAssignment) -> Self {
        self.assignment = assignment;
        self
    }

    /// True when `p` and `q` share a factor; allowed but redundant.
    pub fn has_common_factor(&self) -> bool {
        let (mut a, mut b) = (self.p, self.q);
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a > 1
    }

    /// Parent frequencies `(ω1, ω2) = (q, p)`.
    pub fn frequencies(&self) -> (f64, f64) {
        (self.q as f64, self.p as f64)
    }

    /// `w_K = (1 + A²)^(-L/2) sqrt(C(L, K)) τ^K`, `K = 0..=L`.
    pub fn weights(&self) -> Vec<Complex64> {
        let l = self.l as usize;
        let a = self.amplitude;
        // log C(L, K) by running sums, then one exponential per term
        let mut log_binom = vec![0.0; l + 1];
        for k in 1..=l {
            log_binom[k] = log_binom[k - 1] + ((l - k + 1) as f64).ln() - (k as f64).ln();
        }
        let norm_log = -0.5 * self.l as f64 * (a * a).ln_1p();
        (0..=l)
            .map(|k| {
                let modulus = if a == 0.0 {
                    if k == 0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    (norm_log + 0.5 * log_binom[k] + k as f64 * a.ln()).exp()
                };
                Complex64::from_polar(modulus, k as f64 * self.phase)
            })
            .collect()
    }

    pub fn mode(&self, k: u32) -> Result<ModeIndex> {
        if k > self.l {
            return Err(Error::IndexRange {
                index: k as usize,
                max: self.l as usize,
            });
        }
        Ok(match self.assignment {
            ModeAssignment::Degenerate => ModeIndex::new(self.p * (self.l - k), self.q * k),
            ModeAssignment::Printed => ModeIndex::new(self.q * (self.l - k), self.p * k),
        })
    }

    pub fn modes(&self) -> Vec<ModeIndex> {
        (0..=self.l).map(|k| self.mode(k).expect("k within 0..=L")).collect()
    }

    /// `E(K)/ħ - (p + q)/2 = q m + p n`, exact in integers.
    pub fn energy_quanta(&self, k: u32) -> Result<u64> {
        let m = self.mode(k)?;
        Ok(self.q as u64 * m.m as u64 + self.p as u64 * m.n as u64)
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// Evaluates `Σ_K w_K ψ_{modes[K]}(x, y)` for one oscillator, reusing the
/// Hermite function tables between calls.
pub struct Superposition {
    weights: Vec<Complex64>,
    modes: Vec<ModeIndex>,
    osc: OscillatorParams,
    max_m: usize,
    max_n: usize,
    hx: Vec<f64>,
    hy: Vec<f64>,
}

impl Superposition {
    pub fn new(weights: Vec<Complex64>, modes: Vec<ModeIndex>, osc: OscillatorParams) -> Self {
        assert_eq!(weights.len(), modes.len(), "one weight per mode");
        let max_m = modes.iter().map(|m| m.m as usize).max().unwrap_or(0);
        let max_n = modes.iter().map(|m| m.n as usize).max().unwrap_or(0);
        Self {
            weights,
            modes,
            osc,
            max_m,
            max_n,
            hx: Vec::new(),
            hy: Vec::new(),
        }
    }

    pub fn from_spec(spec: &CoherentSpec, osc: OscillatorParams) -> Self {
        Self::new(spec.weights(), spec.modes(), osc)
    }

    pub fn amplitude(&mut self, x: f64, y: f64) -> Complex64 {
        let (xi, eta) = self.osc.scaled(x, y);
        hermite_functions_into(self.max_m, xi, &mut self.hx);
        hermite_functions_into(self.max_n, eta, &mut self.hy);
        let norm = self.osc.product_norm();
        let mut re = Compensated::default();
        let mut im = Compensated::default();
        for (w, m) in self.weights.iter().zip(&self.modes) {
            let psi = norm * self.hx[m.m as usize] * self.hy[m.n as usize];
            re.add(w.re * psi);
            im.add(w.im * psi);
        }
        Complex64::new(re.value(), im.value())
    }

    pub fn density(&mut self, x: f64, y: f64) -> f64 {
        self.amplitude(x, y).norm_sqr()
    }
}

/// A density sampled on a grid with the nodes that needed special handling.
#[derive(Clone, Debug)]
pub struct CoherentDensity {
    pub field: Field2D<f64>,
    /// Degenerate nodes (value kept) and singular nodes (value set to 0).
    pub flagged: Vec<(usize, usize)>,
}

/// `|Φ(f(u, v), g(u, v))|²`, optionally multiplied by `M/m0`.
pub fn su2_density(
    spec: &CoherentSpec,
    sys: &PdmSystem,
    grid: &Grid2D,
    weighted: bool,
) -> Result<CoherentDensity> {
    let weights = spec.weights();
    let modes = spec.modes();
    sample(grid, |u, v, sup: &mut Superposition| {
        let (x, y) = sys.map.evaluate(u, v)?;
        let d = sup.density(x, y);
        let degenerate = sys.is_degenerate(u, v)?;
        let d = if weighted { d * sys.measure_at(u, v)? } else { d };
        Ok((d, degenerate))
    }, || Superposition::new(weights.clone(), modes.clone(), sys.osc))
}

/// Density of the superposition of rotating-frame states `χ_mn(·, t)`.
pub fn su2_density_magnetic(
    spec: &CoherentSpec,
    map: &CoordinateMap,
    params: &MagneticParams,
    grid: &Grid2D,
    t: f64,
) -> Result<CoherentDensity> {
    let weights = spec.weights();
    let modes = spec.modes();
    let osc = params.rotating_oscillator();
    sample(grid, |u, v, sup: &mut Superposition| {
        let (x, y) = map.evaluate(u, v)?;
        let (x1, y1) = params.rotate(x, y, t);
        let degenerate = map.partials(u, v)?.scale_factor() <= crate::pdm::DEGENERATE_MASS;
        Ok((sup.density(x1, y1), degenerate))
    }, || Superposition::new(weights.clone(), modes.clone(), osc))
}

fn sample<F, I>(grid: &Grid2D, point: F, init: I) -> Result<CoherentDensity>
where
    F: Fn(f64, f64, &mut Superposition) -> Result<(f64, bool)> + Sync,
    I: Fn() -> Superposition + Sync,
{
    use rayon::prelude::*;
    let (nu, nv) = grid.dims();
    let rows: Vec<Result<(Vec<f64>, Vec<(usize, usize)>)>> = (0..nu)
        .into_par_iter()
        .map(|i| {
            let mut sup = init();
            let mut vals = Vec::with_capacity(nv);
            let mut flagged = Vec::new();
            let u = grid.u(i);
            for j in 0..nv {
                let v = grid.v(j);
                match point(u, v, &mut sup) {
                    Ok((d, degenerate)) => {
                        if degenerate {
                            flagged.push((i, j));
                        }
                        vals.push(d);
                    }
                    Err(Error::Singular { .. }) => {
                        flagged.push((i, j));
                        vals.push(0.0);
                    }
                    Err(e) => return Err(e),
                }
            }
            Ok((vals, flagged))
        })
        .collect();
    let mut data = Vec::with_capacity(grid.len());
    let mut flagged = Vec::new();
    for row in rows {
        let (vals, f) = row?;
        data.extend(vals);
        flagged.extend(f);
    }
    let values = ndarray::Array2::from_shape_vec(grid.dims(), data).expect("shape matches grid");
    Ok(CoherentDensity {
        field: Field2D::new(*grid, values)?,
        flagged,
    })
}
