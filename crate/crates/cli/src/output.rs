//! CSV and PGM writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use pdmiso::spectra::Field2D;

use crate::CliError;

/// One row per node, `u` outermost; values with 17 significant digits.
pub fn write_csv(path: &Path, header: &[&str], columns: &[&Field2D<f64>]) -> Result<(), CliError> {
    let grid = columns[0].grid;
    let mut w = BufWriter::new(File::create(path).map_err(|e| io(path, e))?);
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "{}", header.join(","))?;
        let (nu, nv) = grid.dims();
        for i in 0..nu {
            for j in 0..nv {
                write!(w, "{:.16e},{:.16e}", grid.u(i), grid.v(j))?;
                for c in columns {
                    write!(w, ",{:.16e}", c.get(i, j))?;
                }
                writeln!(w)?;
            }
        }
        w.flush()
    };
    body().map_err(|e| io(path, e))
}

/// Min-max normalized gray levels, row `i` of the image is `u_i`.
pub fn gray_levels(field: &Field2D<f64>) -> Vec<u8> {
    let (lo, hi) = (field.min(), field.max());
    let span = hi - lo;
    field
        .values
        .iter()
        .map(|&x| {
            if span > 0.0 && span.is_finite() {
                ((x - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        })
        .collect()
}

/// Binary P5, width `nv`, height `nu`, maxval 255.
pub fn write_pgm(path: &Path, field: &Field2D<f64>) -> Result<(), CliError> {
    let (nu, nv) = field.grid.dims();
    let mut bytes = format!("P5\n{nv} {nu}\n255\n").into_bytes();
    bytes.extend(gray_levels(field));
    std::fs::write(path, bytes).map_err(|e| io(path, e))
}

fn io(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}
