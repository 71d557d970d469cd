//! Manufactured solutions used by the convergence and timing studies.

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semidisc::{Boundary, CoefficientFn, Face, Source};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionId {
    /// `sin(8π(x − ct))`, periodic.
    #[serde(rename = "traveling-1d")]
    Traveling1d,
    /// `cos(15√2 πct) sin(15πx) sin(15πy)`, homogeneous Dirichlet.
    #[serde(rename = "standing-2d")]
    Standing2d,
    /// `sin(16πt) sin(16πx) + cos(16πt) cos(16πy)`, inhomogeneous Dirichlet.
    #[serde(rename = "timing-2d")]
    Timing2d,
    /// `sin(8√2 πt) sin(8πx) sin(8πy)` with `c² = 1 + x² + y²`, periodic.
    #[serde(rename = "variable-2d")]
    Variable2d,
}

impl FromStr for SolutionId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "traveling-1d" => Ok(Self::Traveling1d),
            "standing-2d" => Ok(Self::Standing2d),
            "timing-2d" => Ok(Self::Timing2d),
            "variable-2d" => Ok(Self::Variable2d),
            _ => Err(Error::InvalidConfig(format!(
                "unknown manufactured solution '{s}'"
            ))),
        }
    }
}

impl SolutionId {
    pub fn dims(&self) -> usize {
        match self {
            Self::Traveling1d => 1,
            _ => 2,
        }
    }

    pub fn default_boundary(&self) -> Boundary {
        match self {
            Self::Traveling1d | Self::Variable2d => Boundary::Periodic,
            Self::Standing2d | Self::Timing2d => Boundary::Dirichlet,
        }
    }
}

/// `c² = 1 + x² + y²`.
pub fn quadratic_c2() -> CoefficientFn {
    Arc::new(|x: &[f64]| 1.0 + x.iter().map(|a| a * a).sum::<f64>())
}

/// Exact fields at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactValues {
    pub u: f64,
    pub v: f64,
    pub grad: Vec<f64>,
}

/// A manufactured solution with wave speed `c` (ignored by the variable
/// case, whose medium is fixed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub id: SolutionId,
    pub c: f64,
}

impl Manufactured {
    pub fn new(id: SolutionId, c: f64) -> Self {
        Self { id, c }
    }

    pub fn dims(&self) -> usize {
        self.id.dims()
    }

    pub fn eval(&self, x: &[f64], t: f64) -> ExactValues {
        let c = self.c;
        match self.id {
            SolutionId::Traveling1d => {
                let a = 8.0 * PI;
                let ph = a * (x[0] - c * t);
                ExactValues {
                    u: ph.sin(),
                    v: -a * c * ph.cos(),
                    grad: vec![a * ph.cos()],
                }
            }
            SolutionId::Standing2d => {
                let k = 15.0 * PI;
                let w = 15.0 * 2f64.sqrt() * PI * c;
                let (sx, sy) = ((k * x[0]).sin(), (k * x[1]).sin());
                let (cx, cy) = ((k * x[0]).cos(), (k * x[1]).cos());
                ExactValues {
                    u: (w * t).cos() * sx * sy,
                    v: -w * (w * t).sin() * sx * sy,
                    grad: vec![(w * t).cos() * k * cx * sy, (w * t).cos() * k * sx * cy],
                }
            }
            SolutionId::Timing2d => {
                let k = 16.0 * PI;
                let (st, ct) = ((k * t).sin(), (k * t).cos());
                ExactValues {
                    u: st * (k * x[0]).sin() + ct * (k * x[1]).cos(),
                    v: k * ct * (k * x[0]).sin() - k * st * (k * x[1]).cos(),
                    grad: vec![st * k * (k * x[0]).cos(), -ct * k * (k * x[1]).sin()],
                }
            }
            SolutionId::Variable2d => {
                let k = 8.0 * PI;
                let w = 8.0 * 2f64.sqrt() * PI;
                let (sx, sy) = ((k * x[0]).sin(), (k * x[1]).sin());
                ExactValues {
                    u: (w * t).sin() * sx * sy,
                    v: w * (w * t).cos() * sx * sy,
                    grad: vec![
                        (w * t).sin() * k * (k * x[0]).cos() * sy,
                        (w * t).sin() * k * sx * (k * x[1]).cos(),
                    ],
                }
            }
        }
    }

    pub fn u(&self, x: &[f64], t: f64) -> f64 {
        self.eval(x, t).u
    }

    pub fn v(&self, x: &[f64], t: f64) -> f64 {
        self.eval(x, t).v
    }

    /// `u_tt − ∇·(c²∇u)`; zero except for the variable-coefficient case.
    pub fn forcing_at(&self, x: &[f64], t: f64) -> f64 {
        match self.id {
            SolutionId::Variable2d => {
                let e = self.eval(x, t);
                let k2 = 128.0 * PI * PI;
                k2 * (x[0] * x[0] + x[1] * x[1]) * e.u
                    - 2.0 * x[0] * e.grad[0]
                    - 2.0 * x[1] * e.grad[1]
            }
            _ => 0.0,
        }
    }
}

impl Source for Manufactured {
    fn has_forcing(&self) -> bool {
        self.id == SolutionId::Variable2d
    }

    fn forcing(&self, x: &[f64], t: f64) -> f64 {
        self.forcing_at(x, t)
    }

    fn has_boundary_data(&self) -> bool {
        self.id == SolutionId::Timing2d
    }

    fn boundary_velocity(&self, x: &[f64], t: f64) -> f64 {
        self.v(x, t)
    }

    fn boundary_normal_derivative(&self, x: &[f64], t: f64, face: Face) -> f64 {
        face.normal() * self.eval(x, t).grad[face.axis]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn traveling_wave_at_origin() {
        let m = Manufactured::new(SolutionId::Traveling1d, 1.0);
        let e = m.eval(&[0.0], 0.0);
        assert!(e.u.abs() < 1e-15);
        assert!((e.v + 8.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn standing_wave_initial_data() {
        let m = Manufactured::new(SolutionId::Standing2d, 1.0);
        let x = [0.13, 0.71];
        let e = m.eval(&x, 0.0);
        assert!((e.u - (15.0 * PI * 0.13).sin() * (15.0 * PI * 0.71).sin()).abs() < 1e-14);
        assert_eq!(e.v, 0.0);
    }

    #[test]
    fn ids_parse() {
        assert_eq!(
            "variable-2d".parse::<SolutionId>().unwrap(),
            SolutionId::Variable2d
        );
        assert!("nope".parse::<SolutionId>().is_err());
    }
}
