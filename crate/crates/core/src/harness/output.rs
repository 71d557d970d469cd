//! CSV reports and plain-text grid snapshots.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::semidisc::{FieldState, Semidiscretization};

/// Write `rows` with a header line taken from the row type's field names.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Values of a 1D or 2D field on the global node grid, one value per grid
/// point; element interface nodes take the value of the element to the
/// right (above), except on the far boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSnapshot {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    /// Row-major, `y` rows of `nx` values.
    pub values: Vec<f64>,
}

impl GridSnapshot {
    pub fn of_displacement(semi: &Semidiscretization, state: &FieldState) -> Result<Self> {
        let mesh = semi.mesh();
        let d = mesh.dims();
        if d > 2 {
            return Err(Error::InvalidConfig(format!(
                "snapshots support 1D and 2D meshes, got {d}D"
            )));
        }
        let (u, _) = semi.to_nodal(state);
        let cells = mesh.cells();
        let n1 = cells + 1;
        let epa = mesh.elements_per_axis();
        let nx = epa[0] * cells + 1;
        let ny = if d == 2 { epa[1] * cells + 1 } else { 1 };
        let mut values = vec![0.0; nx * ny];
        for (j, row) in values.chunks_mut(nx).enumerate() {
            let (ey, ly) = if d == 2 {
                split(j, cells, epa[1])
            } else {
                (0, 0)
            };
            for (i, out) in row.iter_mut().enumerate() {
                let (ex, lx) = split(i, cells, epa[0]);
                let elem = ex + ey * epa[0];
                *out = u[elem][lx + ly * n1];
            }
        }
        Ok(Self {
            nx,
            ny,
            x0: mesh.lower()[0],
            y0: if d == 2 { mesh.lower()[1] } else { 0.0 },
            dx: mesh.cell_size(0),
            dy: if d == 2 { mesh.cell_size(1) } else { 0.0 },
            values,
        })
    }

    /// Header line `nx ny x0 y0 dx dy`, then one line per grid row.
    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(
            w,
            "{} {} {} {} {} {}",
            self.nx, self.ny, self.x0, self.y0, self.dx, self.dy
        )?;
        for row in self.values.chunks(self.nx) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.10e}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let malformed =
            |m: &str| Error::InvalidConfig(format!("malformed snapshot {}: {m}", path.display()));
        let mut lines = text.lines();
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| malformed("empty"))?
            .split_whitespace()
            .collect();
        if header.len() != 6 {
            return Err(malformed("header needs 6 fields"));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| malformed("bad integer"));
        let num = |s: &str| s.parse::<f64>().map_err(|_| malformed("bad number"));
        let (nx, ny) = (int(header[0])?, int(header[1])?);
        let mut values = Vec::with_capacity(nx * ny);
        for line in lines {
            let row: Vec<f64> = line.split_whitespace().map(num).collect::<Result<_>>()?;
            if row.len() != nx {
                return Err(malformed("row length"));
            }
            values.extend(row);
        }
        if values.len() != nx * ny {
            return Err(malformed("row count"));
        }
        Ok(Self {
            nx,
            ny,
            x0: num(header[2])?,
            y0: num(header[3])?,
            dx: num(header[4])?,
            dy: num(header[5])?,
            values,
        })
    }
}

/// Global grid index → (element, local node index).
fn split(i: usize, cells: usize, elements: usize) -> (usize, usize) {
    let e = (i / cells).min(elements - 1);
    (e, i - e * cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_assigns_interfaces_right() {
        assert_eq!(split(0, 4, 3), (0, 0));
        assert_eq!(split(4, 4, 3), (1, 0));
        assert_eq!(split(12, 4, 3), (2, 4));
    }
}
