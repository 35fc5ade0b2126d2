//! The `density`, `field` and `verify` runs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pdmiso::coherent::{su2_density, su2_density_magnetic};
use pdmiso::magnetic::{field_profile, magnetic_wavefunction_uv, FieldMethod};
use pdmiso::oscillator::ModeIndex;
use pdmiso::spectra::{discretize, lowest_eigenvalues, quadrature, EigenOptions, Field2D, Grid2D};
use pdmiso::transform::{validate_conformal, Covering, Transformation};
use pdmiso::Error;

use crate::output::{write_csv, write_pgm};
use crate::scenario::Scenario;
use crate::CliError;

/// Times at which coherent densities are compared for stationarity.
pub const STATIONARITY_TIMES: [f64; 3] = [0.0, 0.7, 1.9];
pub const STATIONARITY_TOL: f64 = 1e-10;
pub const WEIGHTS_TOL: f64 = 1e-12;
pub const CURL_TOL: f64 = 1e-6;
pub const PERIODICITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Options {
    pub out: PathBuf,
    /// Replaces the node counts of the scenario grid.
    pub grid: Option<(usize, usize)>,
    /// Seed of the eigensolver start block.
    pub seed: u64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            out: PathBuf::from("."),
            grid: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tol: f64,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= tol,
            value,
            tol,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{}\t{status}\t{:.6e}\t{:e}", c.name, c.value, c.tol);
        }
        s
    }
}

fn grid_for(sc: &Scenario, opts: &Options) -> Result<Grid2D, CliError> {
    let g = sc.grid()?;
    match opts.grid {
        Some((nu, nv)) => g
            .with_dims(nu, nv)
            .map_err(|e| CliError::Config(format!("--grid: {e}"))),
        None => Ok(g),
    }
}

fn prepare_out(opts: &Options) -> Result<(), CliError> {
    std::fs::create_dir_all(&opts.out)
        .map_err(|e| CliError::Io(format!("{}: {e}", opts.out.display())))
}

fn out_path(opts: &Options, sc: &Scenario, suffix: &str) -> PathBuf {
    opts.out.join(format!("{}{suffix}", sc.stem()))
}

/// Squared amplitude with singular nodes set to zero.
fn squared(r: pdmiso::Result<f64>) -> pdmiso::Result<f64> {
    match r {
        Ok(p) => Ok(p * p),
        Err(Error::Singular { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// The probability density the scenario describes, sampled on `grid`.
pub fn density_field(sc: &Scenario, grid: &Grid2D) -> Result<Field2D<f64>, CliError> {
    let sys = sc.system()?;
    let magnetic = sc.magnetic()?;
    let time = sc.magnetic.map_or(0.0, |m| m.time);
    if let Some(spec) = sc.coherent()? {
        let d = match magnetic {
            Some(params) => su2_density_magnetic(&spec, &sys.map, &params, grid, time)?,
            None => su2_density(&spec, &sys, grid, sc.coherent.is_some_and(|c| c.weighted))?,
        };
        return Ok(d.field);
    }
    let Some(mode) = sc.mode() else {
        return Err(CliError::Config(
            "a density needs either `coherent` or `mode`".into(),
        ));
    };
    let field = match magnetic {
        Some(params) => Field2D::try_from_fn(*grid, |u, v| {
            squared(magnetic_wavefunction_uv(&sys.map, &params, mode, u, v, time))
        })?,
        None => Field2D::try_from_fn(*grid, |u, v| squared(sys.wavefunction_uv(mode, u, v)))?,
    };
    Ok(field)
}

/// Writes `{stem}.csv` and `{stem}.pgm`.
pub fn run_density(sc: &Scenario, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let grid = grid_for(sc, opts)?;
    let field = density_field(sc, &grid)?;
    prepare_out(opts)?;
    let mut written = Vec::new();
    if sc.output.csv {
        let p = out_path(opts, sc, ".csv");
        write_csv(&p, &["u", "v", "density"], &[&field])?;
        written.push(p);
    }
    if sc.output.pgm {
        let p = out_path(opts, sc, ".pgm");
        write_pgm(&p, &field)?;
        written.push(p);
    }
    Ok(written)
}

/// Writes `{stem}_field.csv` with `B` and `M`, and a heatmap of `B`.
pub fn run_field(sc: &Scenario, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let Some(params) = sc.magnetic()? else {
        return Err(CliError::Config("`field` needs a `magnetic` section".into()));
    };
    let sys = sc.system()?;
    let grid = grid_for(sc, opts)?;
    let b = Field2D::try_from_fn(grid, |u, v| {
        field_profile(&sys.map, &params, u, v, FieldMethod::Analytic)
    })?;
    let m = Field2D::try_from_fn(grid, |u, v| sys.mass_at(u, v))?;
    prepare_out(opts)?;
    let mut written = Vec::new();
    if sc.output.csv {
        let p = out_path(opts, sc, "_field.csv");
        write_csv(&p, &["u", "v", "B", "M"], &[&b, &m])?;
        written.push(p);
    }
    if sc.output.pgm {
        let p = out_path(opts, sc, "_field.pgm");
        write_pgm(&p, &b)?;
        written.push(p);
    }
    Ok(written)
}

/// Runs every applicable check and writes `{stem}_report.tsv`.
pub fn run_verify(sc: &Scenario, opts: &Options) -> Result<Report, CliError> {
    let sys = sc.system()?;
    let grid = grid_for(sc, opts)?;
    let verify = sc.verify.clone().unwrap_or_default();
    let mut report = Report::default();

    // singular nodes lie outside the map's domain
    let nodes: Vec<(f64, f64)> = grid
        .nodes()
        .map(|(i, j)| (grid.u(i), grid.v(j)))
        .filter(|&(u, v)| !matches!(sys.map.partials(u, v), Err(Error::Singular { .. })))
        .collect();
    let conf = validate_conformal(&sys.map, &nodes);
    report.checks.push(Check {
        name: "conformal".into(),
        passed: conf.passed(),
        value: conf.worst(),
        tol: conf.tolerance,
    });

    let rgrid = match &verify.residual_grid {
        Some(g) => g.build("verify.residual_grid")?,
        None => grid,
    };
    for m in 0..=verify.max_mode {
        for n in 0..=verify.max_mode {
            let r = sys.hamiltonian_residual(ModeIndex::new(m, n), &rgrid)?;
            report.checks.push(Check {
                name: format!("residual_m{m}_n{n}"),
                passed: r.passed(verify.residual_tol),
                value: r.relative,
                tol: verify.residual_tol,
            });
        }
    }

    if let Some(norm) = verify.normalization {
        let ngrid = norm.grid.build("verify.normalization.grid")?;
        let weight = Field2D::try_from_fn(ngrid, |u, v| sys.measure_at(u, v))?;
        for m in 0..=norm.max_mode {
            for n in 0..=norm.max_mode {
                let mode = ModeIndex::new(m, n);
                let dens = Field2D::try_from_fn(ngrid, |u, v| squared(sys.wavefunction_uv(mode, u, v)))?;
                let total = quadrature(&dens, Some(&weight))?;
                report
                    .checks
                    .push(Check::at_most(format!("norm_m{m}_n{n}"), (total - 1.0).abs(), norm.tol));
            }
        }
    }

    let coherent = sc.coherent()?;
    if let Some(spec) = &coherent {
        let total: f64 = spec.weights().iter().map(|w| w.norm_sqr()).sum();
        report
            .checks
            .push(Check::at_most("coherent_weights", (total - 1.0).abs(), WEIGHTS_TOL));
        let quanta = (0..=spec.l)
            .map(|k| spec.energy_quanta(k))
            .collect::<Result<Vec<_>, _>>()?;
        let spread = quanta.iter().max().unwrap() - quanta.iter().min().unwrap();
        report
            .checks
            .push(Check::at_most("coherent_degeneracy", spread as f64, 0.0));
    }

    if let Some(params) = sc.magnetic()? {
        let mut worst: f64 = 0.0;
        for &(u, v) in &nodes {
            let a = match field_profile(&sys.map, &params, u, v, FieldMethod::Analytic) {
                Ok(a) if a != 0.0 => a,
                Ok(_) | Err(Error::Singular { .. }) => continue,
                Err(e) => return Err(e.into()),
            };
            match field_profile(&sys.map, &params, u, v, FieldMethod::FiniteDifference) {
                Ok(fd) => worst = worst.max((a - fd).abs() / a.abs()),
                Err(Error::Singular { .. }) => continue,
                Err(e) => return Err(e.into()),
            }
        }
        report.checks.push(Check::at_most("field_curl", worst, CURL_TOL));

        if let Some(spec) = coherent.filter(|s| s.p == s.q) {
            let densities = STATIONARITY_TIMES
                .iter()
                .map(|&t| su2_density_magnetic(&spec, &sys.map, &params, &grid, t).map(|d| d.field))
                .collect::<Result<Vec<_>, _>>()?;
            let diff = densities[1..]
                .iter()
                .flat_map(|d| d.values.iter().zip(densities[0].values.iter()).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            report
                .checks
                .push(Check::at_most("stationarity", diff, STATIONARITY_TOL));
        }
    }

    if let Covering::PeriodicInV { period } = sys.map.covering() {
        if sc.coherent.is_some() || sc.mode.is_some() {
            let (nu, nv) = grid.dims();
            let shifted = Grid2D::new(
                (grid.u(0), grid.u(nu - 1)),
                (grid.v(0) + period, grid.v(nv - 1) + period),
                nu,
                nv,
            )?;
            let a = density_field(sc, &grid)?;
            let b = density_field(sc, &shifted)?;
            let peak = a.max().abs().max(f64::MIN_POSITIVE);
            let diff = a
                .values
                .iter()
                .zip(b.values.iter())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            report
                .checks
                .push(Check::at_most("periodicity", diff / peak, PERIODICITY_TOL));
        }
    }

    if let Some(eig) = verify.eigen {
        let egrid = eig.grid.build("verify.eigen.grid")?;
        let prob = discretize(&sys, &egrid, eig.boundary.build())?;
        let eopts = EigenOptions {
            seed: opts.seed,
            ..EigenOptions::default()
        };
        let want = lowest_energies(&sys, eig.k);
        match lowest_eigenvalues(&prob, eig.k, &eopts) {
            Ok(s) => {
                for (i, (got, e)) in s.values.iter().zip(&want).enumerate() {
                    report
                        .checks
                        .push(Check::at_most(format!("eigen_{i}"), (got - e).abs() / e, eig.rel_tol));
                }
            }
            Err(Error::NoConvergence { residuals }) => {
                let worst = residuals.iter().copied().fold(0.0, f64::max);
                report.checks.push(Check {
                    name: "eigen_solver".into(),
                    passed: false,
                    value: worst,
                    tol: eopts.tol,
                });
            }
            Err(e) => return Err(e.into()),
        }
    }

    prepare_out(opts)?;
    let path = out_path(opts, sc, "_report.tsv");
    write_report(&path, &report)?;
    Ok(report)
}

/// The `k` smallest oscillator energies with multiplicity.
pub fn lowest_energies(sys: &pdmiso::pdm::PdmSystem, k: usize) -> Vec<f64> {
    let top = k as u32;
    let mut e: Vec<f64> = (0..=top)
        .flat_map(|m| (0..=top).map(move |n| ModeIndex::new(m, n)))
        .map(|mode| sys.energy(mode))
        .collect();
    e.sort_by(f64::total_cmp);
    e.truncate(k);
    e
}

fn write_report(path: &Path, report: &Report) -> Result<(), CliError> {
    std::fs::write(path, report.to_tsv())
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Text for `list-maps`.
pub fn list_maps() -> String {
    use pdmiso::transform::CoordinateMap;
    let maps = [
        ("identity", "", CoordinateMap::identity()),
        ("polynomial", "c1 c2 d1 d2 branch", CoordinateMap::polynomial(1.0, 1.0, 0.0, 0.0, pdmiso::transform::Branch::Minus).expect("valid")),
        ("parabolic_cylinder", "", CoordinateMap::parabolic_cylinder()),
        ("elliptic_cylinder", "a", CoordinateMap::elliptic_cylinder(1.0).expect("valid")),
        ("bipolar", "a", CoordinateMap::bipolar(1.0).expect("valid")),
    ];
    let mut s = String::from("kind\tparams\torientation\tdegenerate\texcluded\n");
    for (kind, params, map) in maps {
        let params = if params.is_empty() { "-" } else { params };
        let _ = writeln!(
            s,
            "{kind}\t{params}\t{:+}\t{}\t{}",
            map.orientation(),
            map.degenerate_points(),
            map.excluded_points()
        );
    }
    s
}
