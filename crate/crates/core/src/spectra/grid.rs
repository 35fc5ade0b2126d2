use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Uniform rectangular lattice over `[u_min, u_max] × [v_min, v_max]`,
/// endpoints included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub nu: usize,
    pub nv: usize,
}

impl Grid2D {
    pub fn new(u: (f64, f64), v: (f64, f64), nu: usize, nv: usize) -> Result<Self> {
        if !(u.0 < u.1 && v.0 < v.1) || ![u.0, u.1, v.0, v.1].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid bounds must be finite and increasing, got u={u:?} v={v:?}"
            )));
        }
        if nu < 3 || nv < 3 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 3 nodes per axis, got {nu}x{nv}"
            )));
        }
        Ok(Self {
            u_min: u.0,
            u_max: u.1,
            v_min: v.0,
            v_max: v.1,
            nu,
            nv,
        })
    }

    /// Square grid `[lo, hi]²` with `n` nodes per axis.
    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new((lo, hi), (lo, hi), n, n)
    }

    pub fn hu(&self) -> f64 {
        (self.u_max - self.u_min) / (self.nu - 1) as f64
    }

    pub fn hv(&self) -> f64 {
        (self.v_max - self.v_min) / (self.nv - 1) as f64
    }

    pub fn u(&self, i: usize) -> f64 {
        self.u_min + i as f64 * self.hu()
    }

    pub fn v(&self, j: usize) -> f64 {
        self.v_min + j as f64 * self.hv()
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nu, self.nv)
    }

    /// Same bounds, different resolution.
    pub fn with_dims(&self, nu: usize, nv: usize) -> Result<Self> {
        Self::new((self.u_min, self.u_max), (self.v_min, self.v_max), nu, nv)
    }

    /// All nodes, row-major in `u`.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.nu).flat_map(move |i| (0..self.nv).map(move |j| (i, j)))
    }

    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        i > 0 && j > 0 && i + 1 < self.nu && j + 1 < self.nv
    }
}

/// Values sampled on a [`Grid2D`]; `values[[i, j]]` sits at `(u_i, v_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field2D<T> {
    pub grid: Grid2D,
    pub values: Array2<T>,
}

impl<T: Clone + Send + Sync> Field2D<T> {
    pub fn new(grid: Grid2D, values: Array2<T>) -> Result<Self> {
        if values.dim() != grid.dims() {
            return Err(Error::GridMismatch(format!(
                "values {:?} vs grid {:?}",
                values.dim(),
                grid.dims()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(u, v)` at every node. Rows are evaluated in parallel.
    pub fn from_fn<F>(grid: Grid2D, f: F) -> Self
    where
        F: Fn(f64, f64) -> T + Sync,
    {
        let data: Vec<T> = (0..grid.nu)
            .into_par_iter()
            .flat_map_iter(|i| {
                let u = grid.u(i);
                let f = &f;
                (0..grid.nv).map(move |j| f(u, grid.v(j)))
            })
            .collect();
        let values = Array2::from_shape_vec(grid.dims(), data).expect("shape matches grid");
        Self { grid, values }
    }

    /// Fallible sampling; the first error in row-major order wins.
    pub fn try_from_fn<F>(grid: Grid2D, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<T> + Sync,
    {
        let rows: Vec<Result<Vec<T>>> = (0..grid.nu)
            .into_par_iter()
            .map(|i| {
                let u = grid.u(i);
                (0..grid.nv).map(|j| f(u, grid.v(j))).collect()
            })
            .collect();
        let mut data = Vec::with_capacity(grid.len());
        for row in rows {
            data.extend(row?);
        }
        let values = Array2::from_shape_vec(grid.dims(), data).expect("shape matches grid");
        Ok(Self { grid, values })
    }

    pub fn map<U: Clone + Send + Sync, F: Fn(&T) -> U>(&self, f: F) -> Field2D<U> {
        Field2D {
            grid: self.grid,
            values: self.values.map(f),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.values[[i, j]]
    }
}

impl Field2D<f64> {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// First node (row-major) holding the maximum value.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut val = f64::NEG_INFINITY;
        for ((i, j), &x) in self.values.indexed_iter() {
            if x > val {
                val = x;
                best = (i, j);
            }
        }
        best
    }

    /// 8-connected components of the superlevel set `{value >= threshold}`,
    /// each listed in row-major discovery order, largest first.
    pub fn superlevel_components(&self, threshold: f64) -> Vec<Vec<(usize, usize)>> {
        let (nu, nv) = self.grid.dims();
        let mut seen = Array2::<bool>::from_elem((nu, nv), false);
        let mut comps = Vec::new();
        for i in 0..nu {
            for j in 0..nv {
                if seen[[i, j]] || self.values[[i, j]] < threshold {
                    continue;
                }
                let mut comp = Vec::new();
                let mut stack = vec![(i, j)];
                seen[[i, j]] = true;
                while let Some((a, b)) = stack.pop() {
                    comp.push((a, b));
                    for da in -1i64..=1 {
                        for db in -1i64..=1 {
                            let (x, y) = (a as i64 + da, b as i64 + db);
                            if x < 0 || y < 0 || x >= nu as i64 || y >= nv as i64 {
                                continue;
                            }
                            let (x, y) = (x as usize, y as usize);
                            if !seen[[x, y]] && self.values[[x, y]] >= threshold {
                                seen[[x, y]] = true;
                                stack.push((x, y));
                            }
                        }
                    }
                }
                comps.push(comp);
            }
        }
        comps.sort_by(|a, b| b.len().cmp(&a.len()));
        comps
    }
}
