//! Galerkin difference basis on an equidistant grid of the unit interval.
//!
//! Interior basis functions are translates of one generating function that
//! coincides, cell by cell, with the Lagrange polynomial of the `p + 1`
//! nodes centred on that cell. Near the ends of the interval the stencil
//! would reach `q - 1` ghost nodes; their values are eliminated by
//! degree-`p` polynomial extrapolation from the first (last) `p + 1` nodes,
//! which folds the ghost functions into the boundary functions.

use crate::error::{Error, Result};

/// Which cell to use when a point sits exactly on a node where the
/// piecewise polynomial is only continuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone)]
struct CellTable {
    first: usize,
    /// `(p + 1) x (p + 1)` row-major: row `r` holds the monomial
    /// coefficients (in the cell-centred coordinate) of function `first + r`.
    coeffs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GdBasis {
    degree: usize,
    half_width: usize,
    cells: usize,
    extrap_weights: Vec<Vec<f64>>,
    tables: Vec<CellTable>,
}

impl GdBasis {
    pub fn new(degree: usize, cells: usize) -> Result<Self> {
        if degree == 0 || degree % 2 == 0 {
            return Err(Error::InvalidDegree(degree));
        }
        let q = degree.div_ceil(2);
        let min = 2 * q - 1;
        if cells < min {
            return Err(Error::MeshTooCoarse { degree, cells, min });
        }
        let p = degree;
        let width = p + 1;

        let extrap_weights: Vec<Vec<f64>> = (0..q - 1)
            .map(|g| {
                let target = -(g as f64) - 1.0;
                (0..width)
                    .map(|j| lagrange_at(j, width, |m| m as f64, target))
                    .collect()
            })
            .collect();

        // Lagrange polynomials of the cell stencil in the cell-centred
        // coordinate t = x/h - k - 1/2; the same for every cell.
        let stencil: Vec<Vec<f64>> = (0..width)
            .map(|r| lagrange_coeffs(r, width, |m| m as f64 - q as f64 + 0.5))
            .collect();

        let n = cells;
        let tables = (0..n)
            .map(|k| {
                let first = (k as isize - q as isize + 1).clamp(0, (n - p) as isize) as usize;
                let mut coeffs = vec![0.0; width * width];
                for (r, ell) in stencil.iter().enumerate() {
                    let s = k as isize - q as isize + 1 + r as isize;
                    let mut add = |func: usize, w: f64| {
                        let row = func - first;
                        for (c, e) in coeffs[row * width..(row + 1) * width].iter_mut().zip(ell) {
                            *c += w * e;
                        }
                    };
                    if s < 0 {
                        let g = (-1 - s) as usize;
                        for (j, &w) in extrap_weights[g].iter().enumerate() {
                            add(j, w);
                        }
                    } else if s as usize > n {
                        let g = s as usize - n - 1;
                        for (j, &w) in extrap_weights[g].iter().enumerate() {
                            add(n - j, w);
                        }
                    } else {
                        add(s as usize, 1.0);
                    }
                }
                CellTable { first, coeffs }
            })
            .collect();

        Ok(Self {
            degree,
            half_width: q,
            cells,
            extrap_weights,
            tables,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Number of nodes, `cells + 1`.
    pub fn len(&self) -> usize {
        self.cells + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell width on the reference interval.
    pub fn spacing(&self) -> f64 {
        1.0 / self.cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.cells as f64
    }

    /// Row `g` expresses the ghost value `g + 1` cells outside the left end
    /// in terms of the first `p + 1` nodal values.
    pub fn extrapolation_weights(&self) -> &[Vec<f64>] {
        &self.extrap_weights
    }

    /// Index of the first of the `p + 1` functions that are nonzero on cell `k`.
    pub fn first_active(&self, cell: usize) -> usize {
        self.tables[cell].first
    }

    /// Values (and optionally reference-coordinate derivatives) of the
    /// `p + 1` functions active on `cell` at local position `s ∈ [0, 1]`
    /// within the cell. Returns the index of the first active function.
    pub fn eval_cell(
        &self,
        cell: usize,
        s: f64,
        values: &mut [f64],
        derivs: Option<&mut [f64]>,
    ) -> usize {
        let width = self.degree + 1;
        let table = &self.tables[cell];
        let t = s - 0.5;
        for (r, v) in values.iter_mut().enumerate().take(width) {
            let row = &table.coeffs[r * width..(r + 1) * width];
            *v = row.iter().rev().fold(0.0, |acc, c| acc * t + c);
        }
        if let Some(d) = derivs {
            let scale = self.cells as f64;
            for (r, dv) in d.iter_mut().enumerate().take(width) {
                let row = &table.coeffs[r * width..(r + 1) * width];
                let mut acc = 0.0;
                for e in (1..width).rev() {
                    acc = acc * t + e as f64 * row[e];
                }
                *dv = acc * scale;
            }
        }
        table.first
    }

    fn locate(&self, x: f64, side: Side) -> Result<(usize, f64)> {
        if !(0.0..=1.0).contains(&x) || x.is_nan() {
            return Err(Error::CoordinateOutOfRange(x));
        }
        let n = self.cells;
        let y = x * n as f64;
        let nearest = y.round();
        let on_node = (y - nearest).abs() < 1e-12;
        let mut k = if on_node {
            nearest as usize
        } else {
            y.floor() as usize
        };
        if on_node && side == Side::Left && k > 0 {
            k -= 1;
        }
        let k = k.min(n - 1);
        let s = if on_node {
            nearest - k as f64
        } else {
            y - k as f64
        };
        Ok((k, s))
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i > self.cells {
            Err(Error::IndexOutOfRange {
                index: i,
                max: self.cells,
            })
        } else {
            Ok(())
        }
    }

    /// Value of basis function `i` at reference coordinate `x`.
    pub fn eval(&self, i: usize, x: f64) -> Result<f64> {
        self.check_index(i)?;
        let (k, s) = self.locate(x, Side::Right)?;
        let mut vals = vec![0.0; self.degree + 1];
        let first = self.eval_cell(k, s, &mut vals, None);
        Ok(if i >= first && i <= first + self.degree {
            vals[i - first]
        } else {
            0.0
        })
    }

    /// Reference-coordinate derivative of basis function `i` at `x`, taken
    /// from the cell on `side` when `x` is a node.
    pub fn eval_deriv(&self, i: usize, x: f64, side: Side) -> Result<f64> {
        self.check_index(i)?;
        let (k, s) = self.locate(x, side)?;
        let mut vals = vec![0.0; self.degree + 1];
        let mut ders = vec![0.0; self.degree + 1];
        let first = self.eval_cell(k, s, &mut vals, Some(&mut ders));
        Ok(if i >= first && i <= first + self.degree {
            ders[i - first]
        } else {
            0.0
        })
    }

    /// Evaluate the expansion with the given nodal coefficients.
    pub fn interpolate(&self, nodal: &[f64], x: f64) -> Result<f64> {
        if nodal.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: nodal.len(),
            });
        }
        let (k, s) = self.locate(x, Side::Right)?;
        let mut vals = vec![0.0; self.degree + 1];
        let first = self.eval_cell(k, s, &mut vals, None);
        Ok(vals.iter().zip(&nodal[first..]).map(|(a, b)| a * b).sum())
    }
}

/// Lagrange basis polynomial `j` on `count` nodes, evaluated at `x`.
fn lagrange_at(j: usize, count: usize, node: impl Fn(usize) -> f64, x: f64) -> f64 {
    let xj = node(j);
    (0..count)
        .filter(|&m| m != j)
        .map(|m| (x - node(m)) / (xj - node(m)))
        .product()
}

/// Monomial coefficients (ascending) of Lagrange basis polynomial `j`.
fn lagrange_coeffs(j: usize, count: usize, node: impl Fn(usize) -> f64) -> Vec<f64> {
    let xj = node(j);
    let mut poly = vec![1.0];
    let mut denom = 1.0;
    for m in (0..count).filter(|&m| m != j) {
        let root = node(m);
        let mut next = vec![0.0; poly.len() + 1];
        for (e, c) in poly.iter().enumerate() {
            next[e + 1] += c;
            next[e] -= root * c;
        }
        poly = next;
        denom *= xj - root;
    }
    poly.iter().map(|c| c / denom).collect()
}
