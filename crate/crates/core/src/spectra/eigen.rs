//! Finite-difference generalized eigenproblem `A x = E B x` for a PDM
//! Hamiltonian, and a shift-invert block Krylov solver for its lowest part.
//!
//! Multiplying the transformed equation by `M` gives
//! `-ħ²/2 (∂u² + ∂v²) ψ + M V ψ = E M ψ`, so with the 5-point stencil `A`
//! is symmetric and `B = diag(M)` is positive.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::Grid2D;
use crate::error::{Error, Result};
use crate::pdm::{PdmSystem, DEGENERATE_MASS};

/// Treatment of one edge of the grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Edge {
    /// `ψ = 0` on the edge nodes.
    #[default]
    Dirichlet,
    /// The opposite edge is the same line; both edges must be `Periodic`.
    Periodic,
    /// Point reflection `(u, v) → (-u, -v)` glues the ghost row to the first
    /// row. Only on a low edge sitting half a spacing from zero; selects the
    /// sector of functions even under the reflection.
    Reflect,
}

/// Edge treatment for the four sides of a grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Boundary {
    pub u_lo: Edge,
    pub u_hi: Edge,
    pub v_lo: Edge,
    pub v_hi: Edge,
}

impl Boundary {
    pub fn dirichlet() -> Self {
        Self::default()
    }

    /// Periodic in `v`, Dirichlet in `u`.
    pub fn periodic_v() -> Self {
        Self {
            v_lo: Edge::Periodic,
            v_hi: Edge::Periodic,
            ..Self::default()
        }
    }
}

/// Symmetric sparse matrix in compressed-row form, both triangles stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSym {
    /// Builds from per-row `(col, value)` lists; duplicate columns are summed.
    fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                if cols.len() > *row_ptr.last().unwrap() && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(c, _)| i.abs_diff(c)))
            .max()
            .unwrap_or(0)
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(c, v)| (v - self.get(c, i)).abs()))
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }
}

/// Cholesky factor of a symmetric positive-definite band matrix.
struct BandCholesky {
    n: usize,
    bw: usize,
    /// Row `i` holds `L[i, i-bw ..= i]`; entries left of column 0 stay zero.
    data: Vec<f64>,
}

impl BandCholesky {
    /// Factors `A - shift · diag(b)`.
    fn factor(a: &SparseSym, b: &[f64], shift: f64) -> Result<Self> {
        let n = a.dim();
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut data = vec![0.0; n * w];
        for i in 0..n {
            for (c, v) in a.row(i) {
                if c <= i {
                    data[i * w + (c + bw - i)] = v;
                }
            }
            data[i * w + bw] -= shift * b[i];
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let jlo = j.saturating_sub(bw);
                let start = lo.max(jlo);
                let ri = i * w + bw - i;
                let rj = j * w + bw - j;
                let mut s = data[ri + j];
                for k in start..j {
                    s -= data[ri + k] * data[rj + k];
                }
                if j < i {
                    data[ri + j] = s / data[rj + j];
                } else {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite(i));
                    }
                    data[ri + i] = s.sqrt();
                }
            }
        }
        Ok(Self { n, bw, data })
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let ri = i * w + bw - i;
            let lo = i.saturating_sub(bw);
            let mut s = x[i];
            for k in lo..i {
                s -= self.data[ri + k] * x[k];
            }
            x[i] = s / self.data[ri + i];
        }
        for i in (0..n).rev() {
            let ri = i * w + bw - i;
            x[i] /= self.data[ri + i];
            let xi = x[i];
            for k in i.saturating_sub(bw)..i {
                x[k] -= self.data[ri + k] * xi;
            }
        }
    }
}

/// Discrete generalized eigenproblem on the unknown nodes of a grid.
#[derive(Clone, Debug)]
pub struct GeneralizedEigenProblem {
    pub a: SparseSym,
    /// Diagonal of `B`.
    pub b: Vec<f64>,
    /// Grid indices of the unknowns, in matrix order.
    pub nodes: Vec<(usize, usize)>,
    pub grid: Grid2D,
}

impl GeneralizedEigenProblem {
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// Samples `f(u, v)` at the unknowns.
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes
            .iter()
            .map(|&(i, j)| f(self.grid.u(i), self.grid.v(j)))
            .collect()
    }

    /// `xᵀ A x / xᵀ B x`.
    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; x.len()];
        self.a.matvec(x, &mut ax);
        let num: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
        let den: f64 = x.iter().zip(&self.b).map(|(a, b)| a * a * b).sum();
        num / den
    }

    /// Same problem with `A` and `B` both multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            a: self.a.scaled(s),
            b: self.b.iter().map(|x| x * s).collect(),
            nodes: self.nodes.clone(),
            grid: self.grid,
        }
    }

    /// `‖A x - λ B x‖ / ‖B x‖`.
    pub fn relative_residual(&self, lambda: f64, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; x.len()];
        self.a.matvec(x, &mut ax);
        let mut r2 = 0.0;
        let mut bx2 = 0.0;
        for ((axi, xi), bi) in ax.iter().zip(x).zip(&self.b) {
            let bx = bi * xi;
            r2 += (axi - lambda * bx).powi(2);
            bx2 += bx * bx;
        }
        (r2 / bx2).sqrt()
    }
}

/// Axis indexing the unknowns fastest.
#[derive(Clone, Copy, PartialEq, Eq)]
enum FastAxis {
    U,
    V,
}

/// Resolution of a neighbour reference to an unknown or a zero boundary value.
struct Layout {
    grid: Grid2D,
    bc: Boundary,
    /// Unknown index per grid node, `None` for Dirichlet or duplicate nodes.
    index: Vec<Option<usize>>,
    nodes: Vec<(usize, usize)>,
    /// Mirror index across zero along each axis.
    mirror_u: Vec<Option<usize>>,
    mirror_v: Vec<Option<usize>>,
}

fn mirror_table(min: f64, h: f64, n: usize, periodic: bool) -> Vec<Option<usize>> {
    let count = if periodic { n - 1 } else { n };
    (0..n)
        .map(|k| {
            let target = -(min + k as f64 * h);
            let pos = (target - min) / h;
            let idx = pos.round();
            if (pos - idx).abs() > 1e-6 {
                return None;
            }
            let idx = idx as i64;
            if periodic {
                Some(idx.rem_euclid(count as i64) as usize)
            } else if idx >= 0 && (idx as usize) < n {
                Some(idx as usize)
            } else {
                None
            }
        })
        .collect()
}

impl Layout {
    fn new(grid: Grid2D, bc: Boundary) -> Result<Self> {
        let pu = bc.u_lo == Edge::Periodic;
        let pv = bc.v_lo == Edge::Periodic;
        if pu != (bc.u_hi == Edge::Periodic) || pv != (bc.v_hi == Edge::Periodic) {
            return Err(Error::Boundary("periodic edges must come in pairs".into()));
        }
        if bc.u_hi == Edge::Reflect || bc.v_hi == Edge::Reflect {
            return Err(Error::Boundary("reflection is supported on low edges only".into()));
        }
        if bc.u_lo == Edge::Reflect && bc.v_lo == Edge::Reflect {
            return Err(Error::Boundary("reflection on both low edges".into()));
        }
        if bc.u_lo == Edge::Reflect && (grid.u_min - 0.5 * grid.hu()).abs() > 1e-9 * grid.hu() {
            return Err(Error::Boundary(format!(
                "u reflection needs u_min = hu/2 = {}, got {}",
                0.5 * grid.hu(),
                grid.u_min
            )));
        }
        if bc.v_lo == Edge::Reflect && (grid.v_min - 0.5 * grid.hv()).abs() > 1e-9 * grid.hv() {
            return Err(Error::Boundary(format!(
                "v reflection needs v_min = hv/2 = {}, got {}",
                0.5 * grid.hv(),
                grid.v_min
            )));
        }
        let mirror_u = mirror_table(grid.u_min, grid.hu(), grid.nu, pu);
        let mirror_v = mirror_table(grid.v_min, grid.hv(), grid.nv, pv);
        if bc.u_lo == Edge::Reflect && mirror_v.iter().any(Option::is_none) {
            return Err(Error::Boundary("v nodes are not symmetric about 0".into()));
        }
        if bc.v_lo == Edge::Reflect && mirror_u.iter().any(Option::is_none) {
            return Err(Error::Boundary("u nodes are not symmetric about 0".into()));
        }

        let keep = |k: usize, n: usize, lo: Edge, hi: Edge| -> bool {
            // high edges are Dirichlet or a periodic copy of the low edge
            let _ = hi;
            if k == 0 {
                lo != Edge::Dirichlet
            } else {
                k + 1 < n
            }
        };
        let fast = if bc.v_lo == Edge::Reflect {
            FastAxis::U
        } else {
            FastAxis::V
        };
        let (nu, nv) = grid.dims();
        let mut index = vec![None; nu * nv];
        let mut nodes = Vec::new();
        let mut visit = |i: usize, j: usize| {
            if keep(i, nu, bc.u_lo, bc.u_hi) && keep(j, nv, bc.v_lo, bc.v_hi) {
                index[i * nv + j] = Some(nodes.len());
                nodes.push((i, j));
            }
        };
        match fast {
            FastAxis::V => (0..nu).for_each(|i| (0..nv).for_each(|j| visit(i, j))),
            FastAxis::U => (0..nv).for_each(|j| (0..nu).for_each(|i| visit(i, j))),
        }
        Ok(Self {
            grid,
            bc,
            index,
            nodes,
            mirror_u,
            mirror_v,
        })
    }

    /// Unknown index of the node at signed grid position `(i, j)`, `None` for
    /// a zero boundary value.
    fn resolve(&self, i: i64, j: i64) -> Option<usize> {
        let (nu, nv) = (self.grid.nu as i64, self.grid.nv as i64);
        let (mut i, mut j) = (i, j);
        if self.bc.u_lo == Edge::Periodic {
            i = i.rem_euclid(nu - 1);
        }
        if self.bc.v_lo == Edge::Periodic {
            j = j.rem_euclid(nv - 1);
        }
        if i == -1 && self.bc.u_lo == Edge::Reflect {
            (i, j) = (0, self.mirror_v[j as usize]? as i64);
        }
        if j == -1 && self.bc.v_lo == Edge::Reflect {
            (i, j) = (self.mirror_u[i as usize]? as i64, 0);
        }
        if i < 0 || j < 0 || i >= nu || j >= nv {
            return None;
        }
        self.index[(i * nv + j) as usize]
    }
}

/// Assembles `A` and `B` for the system on the grid.
///
/// Fails if a degenerate or singular node is among the unknowns.
pub fn discretize(sys: &PdmSystem, grid: &Grid2D, bc: Boundary) -> Result<GeneralizedEigenProblem> {
    let layout = Layout::new(*grid, bc)?;
    let hbar2 = sys.osc.hbar * sys.osc.hbar;
    let cu = 0.5 * hbar2 / (grid.hu() * grid.hu());
    let cv = 0.5 * hbar2 / (grid.hv() * grid.hv());

    let mut bad = Vec::new();
    let mut b = Vec::with_capacity(layout.nodes.len());
    let mut rows = Vec::with_capacity(layout.nodes.len());
    for (p, &(i, j)) in layout.nodes.iter().enumerate() {
        let (u, v) = (grid.u(i), grid.v(j));
        let mass = sys.mass_at(u, v).ok().filter(|m| m / sys.osc.m0 > DEGENERATE_MASS);
        let pot = sys.potential_at(u, v).ok();
        let (Some(mass), Some(pot)) = (mass, pot) else {
            bad.push((i, j));
            b.push(f64::NAN);
            rows.push(Vec::new());
            continue;
        };
        b.push(mass);
        let mut row = vec![(p, 2.0 * cu + 2.0 * cv + mass * pot)];
        let (si, sj) = (i as i64, j as i64);
        for (di, dj, c) in [(-1, 0, cu), (1, 0, cu), (0, -1, cv), (0, 1, cv)] {
            if let Some(q) = layout.resolve(si + di, sj + dj) {
                row.push((q, -c));
            }
        }
        rows.push(row);
    }
    if let Some(&first) = bad.first() {
        return Err(Error::DegenerateNodes {
            count: bad.len(),
            first,
            nodes: bad,
        });
    }
    Ok(GeneralizedEigenProblem {
        a: SparseSym::from_rows(rows),
        b,
        nodes: layout.nodes,
        grid: *grid,
    })
}

/// Solver settings for [`lowest_eigenvalues`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    /// Residual contract `‖A x - λ B x‖ ≤ tol ‖B x‖`.
    pub tol: f64,
    pub seed: u64,
    /// Krylov blocks per cycle.
    pub blocks: usize,
    pub max_cycles: usize,
    /// Shift `σ` of `(A - σB)⁻¹`; `None` tries 0 and falls back to a
    /// Gershgorin lower bound.
    pub shift: Option<f64>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            seed: 0,
            blocks: 8,
            max_cycles: 40,
            shift: None,
        }
    }
}

/// Lowest eigenpairs, ascending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// `‖A x - λ B x‖ / ‖B x‖` per pair.
    pub residuals: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub cycles: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Orthonormalizes `w` against `basis` (two Gram-Schmidt passes). Returns
/// false when `w` is numerically inside the span.
fn orthonormalize(w: &mut [f64], basis: &[Vec<f64>]) -> bool {
    let norm0 = dot(w, w).sqrt();
    if norm0 == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
    let norm = dot(w, w).sqrt();
    if norm < 1e-10 * norm0 {
        return false;
    }
    w.iter_mut().for_each(|x| *x /= norm);
    true
}

fn gershgorin_lower(prob: &GeneralizedEigenProblem) -> f64 {
    (0..prob.dim())
        .map(|i| {
            let bi = prob.b[i];
            let mut diag = 0.0;
            let mut off = 0.0;
            for (c, v) in prob.a.row(i) {
                if c == i {
                    diag = v / bi;
                } else {
                    off += v.abs() / (bi * prob.b[c]).sqrt();
                }
            }
            diag - off
        })
        .fold(f64::INFINITY, f64::min)
}

/// The `k` smallest eigenvalues of `A x = E B x`.
///
/// Works on the symmetric form `C = B^{-1/2} A B^{-1/2}` through
/// `T = B^{1/2} (A - σB)⁻¹ B^{1/2}`, whose dominant eigenvalues
/// `1/(E - σ)` belong to the lowest `E`. Each cycle builds a block Krylov
/// space of `T`, extracts Ritz pairs and restarts from the best ones until
/// every requested pair meets the residual contract.
pub fn lowest_eigenvalues(
    prob: &GeneralizedEigenProblem,
    k: usize,
    opts: &EigenOptions,
) -> Result<Spectrum> {
    let n = prob.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "requested {k} eigenvalues of a {n}-dimensional problem"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let (shift, chol) = match opts.shift {
        Some(s) => (s, BandCholesky::factor(&prob.a, &prob.b, s)?),
        None => match BandCholesky::factor(&prob.a, &prob.b, 0.0) {
            Ok(c) => (0.0, c),
            Err(_) => {
                let g = gershgorin_lower(prob);
                let s = g - 1e-6 * (1.0 + g.abs());
                (s, BandCholesky::factor(&prob.a, &prob.b, s)?)
            }
        },
    };
    let sqrt_b: Vec<f64> = prob.b.iter().map(|x| x.sqrt()).collect();
    let apply_t = |y: &[f64]| -> Vec<f64> {
        let mut z: Vec<f64> = y.iter().zip(&sqrt_b).map(|(a, b)| a * b).collect();
        chol.solve_in_place(&mut z);
        z.iter_mut().zip(&sqrt_b).for_each(|(a, b)| *a *= b);
        z
    };

    let block = (k + 2).max(4).min(n);
    let max_dim = (block * (opts.blocks + 1)).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random_vec = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| rng.gen::<f64>() - 0.5).collect()
    };
    let mut start: Vec<Vec<f64>> = (0..block).map(|_| random_vec(&mut rng)).collect();
    let mut best_residuals = vec![f64::INFINITY; k];

    for cycle in 1..=opts.max_cycles {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_dim);
        let mut images: Vec<Vec<f64>> = Vec::with_capacity(max_dim);
        let mut pending: Vec<Vec<f64>> = std::mem::take(&mut start);
        while basis.len() < max_dim && !pending.is_empty() {
            let mut next = Vec::new();
            for mut w in pending {
                if basis.len() >= max_dim {
                    break;
                }
                if !orthonormalize(&mut w, &basis) {
                    let mut r = random_vec(&mut rng);
                    if !orthonormalize(&mut r, &basis) {
                        continue;
                    }
                    w = r;
                }
                let tw = apply_t(&w);
                basis.push(w);
                next.push(tw.clone());
                images.push(tw);
            }
            pending = next;
        }

        let m = basis.len();
        let h = DMatrix::from_fn(m, m, |i, j| {
            0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]))
        });
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

        let mut values = Vec::with_capacity(block);
        let mut ritz = Vec::with_capacity(block);
        for &idx in order.iter().take(block.min(m)) {
            let theta = eig.eigenvalues[idx];
            let mut y = vec![0.0; n];
            for (c, q) in basis.iter().enumerate() {
                axpy(eig.eigenvectors[(c, idx)], q, &mut y);
            }
            values.push(shift + 1.0 / theta);
            ritz.push(y);
        }

        let xs: Vec<Vec<f64>> = ritz
            .iter()
            .take(k)
            .map(|y| y.iter().zip(&sqrt_b).map(|(a, b)| a / b).collect())
            .collect();
        let residuals: Vec<f64> = xs
            .iter()
            .zip(&values)
            .map(|(x, &lam)| prob.relative_residual(lam, x))
            .collect();
        if residuals.iter().sum::<f64>() < best_residuals.iter().sum::<f64>() {
            best_residuals = residuals.clone();
        }
        if residuals.iter().all(|&r| r <= opts.tol) {
            let mut pairs: Vec<(f64, f64, Vec<f64>)> = values
                .into_iter()
                .zip(residuals)
                .zip(xs)
                .map(|((v, r), x)| (v, r, x))
                .collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            return Ok(Spectrum {
                values: pairs.iter().map(|p| p.0).collect(),
                residuals: pairs.iter().map(|p| p.1).collect(),
                vectors: pairs.into_iter().map(|p| p.2).collect(),
                cycles: cycle,
            });
        }
        start = ritz;
    }
    Err(Error::NoConvergence {
        residuals: best_residuals,
    })
}
