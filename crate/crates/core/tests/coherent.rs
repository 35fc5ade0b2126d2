use std::f64::consts::TAU;

use pdmiso::coherent::{su2_density, CoherentSpec, ModeAssignment};
use pdmiso::oscillator::{ModeIndex, OscillatorParams};
use pdmiso::pdm::PdmSystem;
use pdmiso::spectra::{quadrature, Field2D, Grid2D};
use pdmiso::transform::{Branch, CoordinateMap};

fn figure_one(d2: f64) -> Field2D<f64> {
    let spec = CoherentSpec::new(1, 1, 20, 1.0).unwrap();
    let map = CoordinateMap::polynomial(1.0, 1.0, 0.0, d2, Branch::Plus).unwrap();
    let sys = PdmSystem::new(map, OscillatorParams::unit(1.0, 1.0));
    let grid = Grid2D::square(-4.5, 4.5, 301).unwrap();
    su2_density(&spec, &sys, &grid, false).unwrap().field
}

#[test]
fn ridge_is_connected_for_small_shift() {
    let f = figure_one(4.0);
    let comps = f.superlevel_components(0.95 * f.max());
    assert_eq!(comps.len(), 1, "sizes {:?}", comps.iter().map(Vec::len).collect::<Vec<_>>());
}

#[test]
fn ridge_splits_for_large_shift() {
    let f = figure_one(7.0);
    let comps = f.superlevel_components(0.95 * f.max());
    assert_eq!(comps.len(), 2, "sizes {:?}", comps.iter().map(Vec::len).collect::<Vec<_>>());
    // the double cover makes the two pieces images of each other under w → -w
    let g = f.grid;
    let centroid = |c: &Vec<(usize, usize)>| {
        let n = c.len() as f64;
        let (su, sv) = c.iter().fold((0.0, 0.0), |(a, b), &(i, j)| (a + g.u(i), b + g.v(j)));
        (su / n, sv / n)
    };
    let (a, b) = (centroid(&comps[0]), centroid(&comps[1]));
    assert!((a.0 + b.0).abs() < 0.05 && (a.1 + b.1).abs() < 0.05, "{a:?} {b:?}");
}

#[test]
fn identity_ridge_is_circular() {
    // density ∝ r^{2L} e^{-r²}: maxima on r = √L, same radius along the axes
    let spec = CoherentSpec::new(1, 1, 20, 1.0).unwrap();
    let sys = PdmSystem::new(CoordinateMap::identity(), OscillatorParams::unit(1.0, 1.0));
    let grid = Grid2D::square(-7.0, 7.0, 281).unwrap();
    let f = su2_density(&spec, &sys, &grid, false).unwrap().field;
    let comps = f.superlevel_components(0.95 * f.max());
    assert_eq!(comps.len(), 1);
    let radii: Vec<f64> = comps[0].iter().map(|&(i, j)| grid.u(i).hypot(grid.v(j))).collect();
    let mean = radii.iter().sum::<f64>() / radii.len() as f64;
    assert!((mean - 20f64.sqrt()).abs() < 0.05 * 20f64.sqrt(), "{mean}");
    // ridge reaches all four quadrants equally
    let counts = comps[0].iter().fold([0usize; 4], |mut acc, &(i, j)| {
        let q = (grid.u(i) >= 0.0) as usize * 2 + (grid.v(j) >= 0.0) as usize;
        acc[q] += 1;
        acc
    });
    let mean_count = counts.iter().sum::<usize>() as f64 / 4.0;
    for c in counts {
        assert!((c as f64 - mean_count).abs() < 0.05 * mean_count, "{counts:?}");
    }
}

#[test]
fn measure_weighted_total_probability() {
    let spec = CoherentSpec::new(1, 1, 20, 1.0).unwrap();
    let osc = OscillatorParams::unit(1.0, 1.0);
    let id = PdmSystem::new(CoordinateMap::identity(), osc);
    let grid = Grid2D::square(-8.0, 8.0, 301).unwrap();
    let d = su2_density(&spec, &id, &grid, true).unwrap();
    assert!((quadrature(&d.field, None).unwrap() - 1.0).abs() < 2e-2);

    // parabolic fundamental domain v ≥ 0
    let para = PdmSystem::new(CoordinateMap::parabolic_cylinder(), osc);
    let grid = Grid2D::new((-4.2, 4.2), (0.0, 4.2), 301, 301).unwrap();
    let d = su2_density(&spec, &para, &grid, true).unwrap();
    assert!((quadrature(&d.field, None).unwrap() - 1.0).abs() < 2e-2);
    assert_eq!(d.flagged, vec![(150, 0)]);
}

#[test]
fn printed_assignment_for_equal_ratios_is_the_same_state() {
    let spec = CoherentSpec::new(2, 2, 4, 0.7).unwrap();
    let printed = spec.with_assignment(ModeAssignment::Printed);
    assert_eq!(spec.modes(), printed.modes());
}

fn weighted_norm(sys: &PdmSystem, mode: ModeIndex, grid: Grid2D) -> f64 {
    let dens = Field2D::from_fn(grid, |u, v| sys.wavefunction_uv(mode, u, v).unwrap().powi(2));
    let w = Field2D::from_fn(grid, |u, v| sys.measure_at(u, v).unwrap());
    quadrature(&dens, Some(&w)).unwrap()
}

#[test]
fn weighted_norms_on_fundamental_domains() {
    let osc = OscillatorParams::unit(1.0, 1.3);
    let para = PdmSystem::new(CoordinateMap::parabolic_cylinder(), osc);
    let ell = PdmSystem::new(CoordinateMap::elliptic_cylinder(1.0).unwrap(), osc);
    let para_grid = Grid2D::new((-4.5, 4.5), (0.0, 4.5), 361, 181).unwrap();
    let ell_grid = Grid2D::new((0.0, 3.2), (0.0, TAU), 321, 321).unwrap();
    for m in 0..=2 {
        for n in 0..=2 {
            let mode = ModeIndex::new(m, n);
            let a = weighted_norm(&para, mode, para_grid);
            let b = weighted_norm(&ell, mode, ell_grid);
            assert!((a - 1.0).abs() < 1e-3, "parabolic {mode}: {a}");
            assert!((b - 1.0).abs() < 1e-3, "elliptic {mode}: {b}");
            // with 2^(m+n+1) in the prefactor the norm would be 1/4
            assert!((a / 4.0 - 1.0).abs() > 0.5);
        }
    }
}
