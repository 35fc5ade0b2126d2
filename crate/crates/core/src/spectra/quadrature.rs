use super::grid::Field2D;
use crate::error::{Error, Result};

/// Tensor-product trapezoidal rule for `∬ field · weight du dv` over the
/// field's grid.
///
/// A grid spanning exactly one period in `v` (both endpoints included) gets
/// the periodic trapezoidal rule for free: the two half-weighted end columns
/// sum to one full column.
pub fn quadrature(field: &Field2D<f64>, weight: Option<&Field2D<f64>>) -> Result<f64> {
    if let Some(w) = weight {
        if w.grid != field.grid {
            return Err(Error::GridMismatch(format!(
                "weight grid {:?} differs from field grid {:?}",
                w.grid, field.grid
            )));
        }
    }
    let g = field.grid;
    let end_weight = |k: usize, n: usize| if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
    let mut total = 0.0;
    for i in 0..g.nu {
        let wi = end_weight(i, g.nu);
        let mut row = 0.0;
        for j in 0..g.nv {
            let mut x = field.values[[i, j]];
            if let Some(w) = weight {
                x *= w.values[[i, j]];
            }
            row += end_weight(j, g.nv) * x;
        }
        total += wi * row;
    }
    Ok(total * g.hu() * g.hv())
}
