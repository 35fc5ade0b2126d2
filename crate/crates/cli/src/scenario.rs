//! JSON scenario files. Every section rejects unknown keys.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use pdmiso::coherent::{CoherentSpec, ModeAssignment};
use pdmiso::magnetic::MagneticParams;
use pdmiso::oscillator::{ModeIndex, OscillatorParams};
use pdmiso::pdm::{MassForm, PdmSystem};
use pdmiso::spectra::{Boundary, Edge, Grid2D};
use pdmiso::transform::{Branch, CoordinateMap, MapKind, PolynomialParams};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    pub map: MapSpec,
    #[serde(default)]
    pub mass_form: MassFormSpec,
    pub oscillator: OscillatorSpec,
    #[serde(default)]
    pub magnetic: Option<MagneticSpec>,
    #[serde(default)]
    pub coherent: Option<CoherentConfig>,
    /// Single eigenfunction `[m, n]` when no coherent state is given.
    #[serde(default)]
    pub mode: Option<[u32; 2]>,
    pub grid: GridSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub verify: Option<VerifySpec>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Identity,
    Polynomial {
        c1: f64,
        c2: f64,
        #[serde(default)]
        d1: f64,
        #[serde(default)]
        d2: f64,
        #[serde(default)]
        branch: BranchSpec,
    },
    ParabolicCylinder,
    EllipticCylinder {
        a: f64,
    },
    Bipolar {
        a: f64,
    },
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
pub enum BranchSpec {
    #[default]
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum MassFormSpec {
    #[default]
    Metric,
    Printed,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OscillatorSpec {
    #[serde(default = "one")]
    pub m0: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    pub omega1: f64,
    pub omega2: f64,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MagneticSpec {
    pub b0: f64,
    #[serde(default = "one")]
    pub charge: f64,
    /// Trap frequency; the oscillator `omega1` when absent.
    #[serde(default)]
    pub omega: Option<f64>,
    #[serde(default)]
    pub c_phase: f64,
    #[serde(default)]
    pub time: f64,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CoherentConfig {
    pub p: u32,
    pub q: u32,
    pub l: u32,
    pub amplitude: f64,
    #[serde(default = "half_pi")]
    pub phase: f64,
    #[serde(default)]
    pub assignment: AssignmentSpec,
    /// Multiply the density by `M/m0`.
    #[serde(default)]
    pub weighted: bool,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentSpec {
    #[default]
    Degenerate,
    Printed,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub u: [f64; 2],
    pub v: [f64; 2],
    pub nu: usize,
    pub nv: usize,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// File name stem; the scenario name when absent.
    #[serde(default)]
    pub stem: Option<String>,
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default = "yes")]
    pub pgm: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            stem: None,
            csv: true,
            pgm: true,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    /// Residual checks for all modes with `m, n <= max_mode`.
    #[serde(default = "three")]
    pub max_mode: u32,
    #[serde(default = "residual_tol")]
    pub residual_tol: f64,
    /// Grid for the residual checks; the scenario grid when absent.
    #[serde(default)]
    pub residual_grid: Option<GridSpec>,
    #[serde(default)]
    pub normalization: Option<NormalizationSpec>,
    #[serde(default)]
    pub eigen: Option<EigenSpec>,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            max_mode: three(),
            residual_tol: residual_tol(),
            residual_grid: None,
            normalization: None,
            eigen: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NormalizationSpec {
    pub grid: GridSpec,
    #[serde(default = "two")]
    pub max_mode: u32,
    #[serde(default = "norm_tol")]
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EigenSpec {
    pub k: usize,
    pub grid: GridSpec,
    #[serde(default)]
    pub boundary: BoundarySpec,
    #[serde(default = "eigen_tol")]
    pub rel_tol: f64,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    #[serde(default)]
    pub u_lo: EdgeSpec,
    #[serde(default)]
    pub u_hi: EdgeSpec,
    #[serde(default)]
    pub v_lo: EdgeSpec,
    #[serde(default)]
    pub v_hi: EdgeSpec,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum EdgeSpec {
    #[default]
    Dirichlet,
    Periodic,
    Reflect,
}

fn one() -> f64 {
    1.0
}
fn half_pi() -> f64 {
    FRAC_PI_2
}
fn yes() -> bool {
    true
}
fn two() -> u32 {
    2
}
fn three() -> u32 {
    3
}
fn residual_tol() -> f64 {
    1e-3
}
fn norm_tol() -> f64 {
    1e-3
}
fn eigen_tol() -> f64 {
    1e-2
}

impl Scenario {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn stem(&self) -> &str {
        self.output.stem.as_deref().unwrap_or(&self.name)
    }

    pub fn map(&self) -> Result<CoordinateMap, CliError> {
        let kind = match self.map {
            MapSpec::Identity => MapKind::Identity,
            MapSpec::Polynomial {
                c1,
                c2,
                d1,
                d2,
                branch,
            } => MapKind::Polynomial(PolynomialParams {
                c1,
                c2,
                d1,
                d2,
                branch: match branch {
                    BranchSpec::Minus => Branch::Minus,
                    BranchSpec::Plus => Branch::Plus,
                },
            }),
            MapSpec::ParabolicCylinder => MapKind::ParabolicCylinder,
            MapSpec::EllipticCylinder { a } => MapKind::EllipticCylinder { a },
            MapSpec::Bipolar { a } => MapKind::Bipolar { a },
        };
        CoordinateMap::new(kind).map_err(|e| CliError::Config(format!("map: {e}")))
    }

    pub fn oscillator(&self) -> Result<OscillatorParams, CliError> {
        let o = self.oscillator;
        OscillatorParams::new(o.m0, o.hbar, o.omega1, o.omega2)
            .map_err(|e| CliError::Config(format!("oscillator: {e}")))
    }

    pub fn system(&self) -> Result<PdmSystem, CliError> {
        let form = match self.mass_form {
            MassFormSpec::Metric => MassForm::Metric,
            MassFormSpec::Printed => MassForm::Printed,
        };
        Ok(PdmSystem::new(self.map()?, self.oscillator()?).with_mass_form(form))
    }

    pub fn magnetic(&self) -> Result<Option<MagneticParams>, CliError> {
        let Some(m) = self.magnetic else {
            return Ok(None);
        };
        let o = self.oscillator;
        MagneticParams::new(m.b0, m.charge, m.omega.unwrap_or(o.omega1), o.m0, o.hbar, m.c_phase)
            .map(Some)
            .map_err(|e| CliError::Config(format!("magnetic: {e}")))
    }

    pub fn coherent(&self) -> Result<Option<CoherentSpec>, CliError> {
        let Some(c) = self.coherent else {
            return Ok(None);
        };
        let assignment = match c.assignment {
            AssignmentSpec::Degenerate => ModeAssignment::Degenerate,
            AssignmentSpec::Printed => ModeAssignment::Printed,
        };
        CoherentSpec::new(c.p, c.q, c.l, c.amplitude)
            .map(|s| s.with_phase(c.phase).with_assignment(assignment))
            .map(Some)
            .map_err(|e| CliError::Config(format!("coherent: {e}")))
    }

    pub fn mode(&self) -> Option<ModeIndex> {
        self.mode.map(|[m, n]| ModeIndex::new(m, n))
    }

    pub fn grid(&self) -> Result<Grid2D, CliError> {
        self.grid.build("grid")
    }
}

impl GridSpec {
    pub fn build(&self, what: &str) -> Result<Grid2D, CliError> {
        Grid2D::new((self.u[0], self.u[1]), (self.v[0], self.v[1]), self.nu, self.nv)
            .map_err(|e| CliError::Config(format!("{what}: {e}")))
    }
}

impl BoundarySpec {
    pub fn build(&self) -> Boundary {
        let e = |s: EdgeSpec| match s {
            EdgeSpec::Dirichlet => Edge::Dirichlet,
            EdgeSpec::Periodic => Edge::Periodic,
            EdgeSpec::Reflect => Edge::Reflect,
        };
        Boundary {
            u_lo: e(self.u_lo),
            u_hi: e(self.u_hi),
            v_lo: e(self.v_lo),
            v_hi: e(self.v_hi),
        }
    }
}

/// Parses `NUxNV`.
pub fn parse_grid_override(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NUxNV, got {s:?}"))?;
    let nu = a.trim().parse().map_err(|_| format!("bad NU in {s:?}"))?;
    let nv = b.trim().parse().map_err(|_| format!("bad NV in {s:?}"))?;
    Ok((nu, nv))
}
