//! JSON run configuration.

use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};

use super::solutions::SolutionId;
use crate::analysis::SpectrumBoundary;
use crate::error::{Error, Result};
use crate::semidisc::{Boundary, FluxScheme, Path};

/// Version of the config layout understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Refinement {
    /// Fixed element count, the ladder lists cell counts `N`.
    FixElements,
    /// Fixed `N`, the ladder lists element counts per axis.
    FixCells,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    Fast,
    Direct,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumBc {
    Periodic,
    DirichletNeumann,
}

impl From<SpectrumBc> for SpectrumBoundary {
    fn from(b: SpectrumBc) -> Self {
        match b {
            SpectrumBc::Periodic => SpectrumBoundary::Periodic,
            SpectrumBc::DirichletNeumann => SpectrumBoundary::DirichletNeumann,
        }
    }
}

/// Ocean-channel problem. Depth is `D = −y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OceanConfig {
    pub elements: [usize; 2],
    pub cells: usize,
    pub width: f64,
    pub depth: f64,
    pub source_x: f64,
    pub source_depth: f64,
    /// Time dependence `sin(2π f t)`.
    pub frequency: f64,
    pub amplitude: f64,
    /// Gaussian width in cell widths.
    pub sigma_cells: f64,
    /// The source is switched off from this time on.
    pub source_cutoff: f64,
    pub snapshots: Vec<f64>,
    pub flux: String,
    pub xi: f64,
    pub cfl: f64,
    pub t_end: f64,
}

impl Default for OceanConfig {
    fn default() -> Self {
        Self {
            elements: [25, 13],
            cells: 10,
            width: 4000.0,
            depth: 2000.0,
            source_x: 200.0,
            source_depth: 100.0,
            frequency: 200.0,
            amplitude: 1.0,
            sigma_cells: 2.0,
            source_cutoff: 0.1,
            snapshots: vec![0.25, 0.5, 0.75, 1.0, 1.25],
            flux: "upwind".into(),
            xi: 1500.0,
            cfl: 0.1,
            t_end: 1.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    /// Degree `p`.
    pub degree: usize,
    /// Cells per element and axis, `N`.
    pub cells: usize,
    /// Elements per axis, `n`.
    pub elements: usize,
    pub flux: String,
    pub xi: f64,
    pub solution: SolutionId,
    /// Defaults to the solution's natural boundary condition.
    pub boundary: Option<Boundary>,
    pub speed: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub path: PathKind,
    pub pcg_tol: f64,
    /// Tolerance multiplier per ladder step.
    pub pcg_tol_factor: f64,
    pub pcg_max_iter: usize,
    pub refinement: Refinement,
    pub ladder: Vec<usize>,
    /// Bloch phases per sweep over `(0, 2π)`.
    pub k_points: usize,
    /// Elements per Bloch cell.
    pub bloch_elements: usize,
    pub degrees: Vec<usize>,
    pub spectrum_bc: SpectrumBc,
    pub timing_steps: usize,
    /// Passes over the timing ladder; each point keeps its fastest pass.
    pub timing_rounds: usize,
    pub ocean: OceanConfig,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA_VERSION,
            degree: 3,
            cells: 10,
            elements: 2,
            flux: "upwind".into(),
            xi: 1.0,
            solution: SolutionId::Traveling1d,
            boundary: None,
            speed: 1.0,
            cfl: 0.075 / (2.0 * std::f64::consts::PI),
            t_end: 1.075,
            path: PathKind::Fast,
            pcg_tol: 1e-10,
            pcg_tol_factor: 1.0,
            pcg_max_iter: 500,
            refinement: Refinement::FixCells,
            ladder: vec![2, 4, 6, 8, 10],
            k_points: 64,
            bloch_elements: 1,
            degrees: vec![1, 3, 5, 7, 9],
            spectrum_bc: SpectrumBc::Periodic,
            timing_steps: 10,
            timing_rounds: 5,
            ocean: OceanConfig::default(),
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        match raw.get("schema").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => {
                return Err(Error::InvalidConfig(format!(
                    "unsupported schema version {v} (expected {SCHEMA_VERSION})"
                )))
            }
            None => {
                return Err(Error::InvalidConfig(
                    "missing integer field 'schema'".into(),
                ))
            }
        }
        let cfg: Self =
            serde_json::from_value(raw).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn scheme(&self) -> Result<FluxScheme> {
        FluxScheme::preset(&self.flux, self.xi)
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
            .unwrap_or_else(|| self.solution.default_boundary())
    }

    pub fn dims(&self) -> usize {
        self.solution.dims()
    }

    /// Solver path for ladder point `step`, with the PCG tolerance schedule.
    pub fn solver_path(&self, step: usize) -> Path {
        match self.path {
            PathKind::Fast => Path::Fast,
            PathKind::Direct => Path::Direct,
            PathKind::Iterative => Path::Iterative {
                rel_tol: self.pcg_tol * self.pcg_tol_factor.powi(step as i32),
                max_iter: self.pcg_max_iter,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.schema != SCHEMA_VERSION {
            return bad(format!("unsupported schema version {}", self.schema));
        }
        if self.degree == 0 || self.degree % 2 == 0 {
            return bad(format!(
                "degree must be odd and positive, got {}",
                self.degree
            ));
        }
        if self.cells == 0 || self.elements == 0 {
            return bad("cells and elements must be positive".into());
        }
        self.scheme()?;
        for (name, v) in [("speed", self.speed), ("cfl", self.cfl)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be nonnegative, got {}", self.t_end));
        }
        if !(self.pcg_tol > 0.0 && self.pcg_tol < 1.0)
            || !(self.pcg_tol_factor > 0.0)
            || self.pcg_max_iter == 0
        {
            return bad("invalid PCG settings".into());
        }
        if self.ladder.is_empty()
            || self.ladder.windows(2).any(|w| w[0] >= w[1])
            || self.ladder[0] == 0
        {
            return bad(format!(
                "ladder must be nonempty and strictly increasing, got {:?}",
                self.ladder
            ));
        }
        if self.degrees.iter().any(|p| p % 2 == 0) {
            return bad(format!("degrees must be odd, got {:?}", self.degrees));
        }
        if self.k_points == 0
            || self.bloch_elements == 0
            || self.timing_steps == 0
            || self.timing_rounds == 0
        {
            return bad(
                "k_points, bloch_elements, timing_steps and timing_rounds must be positive".into(),
            );
        }
        let o = &self.ocean;
        if o.elements.contains(&0)
            || o.cells == 0
            || !(o.width > 0.0)
            || !(o.depth > 0.0)
            || !(o.sigma_cells > 0.0)
        {
            return bad("invalid ocean geometry".into());
        }
        FluxScheme::preset(&o.flux, o.xi)?;
        if !(o.cfl > 0.0 && o.cfl.is_finite()) || !(o.t_end >= 0.0 && o.t_end.is_finite()) {
            return bad("invalid ocean time controls".into());
        }
        if o.snapshots.iter().any(|t| !(*t >= 0.0)) {
            return bad("snapshot times must be nonnegative".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let c = RunConfig::default();
        let back = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(c, back);
        back.validate().unwrap();
    }

    #[test]
    fn schema_is_required() {
        assert!(RunConfig::from_json("{\"degree\": 3}").is_err());
        assert!(RunConfig::from_json("{\"schema\": 99}").is_err());
        let c = RunConfig::from_json("{\"schema\": 1, \"degree\": 5}").unwrap();
        assert_eq!(c.degree, 5);
    }

    #[test]
    fn unknown_fields_rejected() {
        let e = RunConfig::from_json("{\"schema\": 1, \"degre\": 5}").unwrap_err();
        assert!(e.is_validation());
    }

    #[test]
    fn non_monotone_ladder_rejected() {
        let c = RunConfig {
            ladder: vec![4, 2],
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
