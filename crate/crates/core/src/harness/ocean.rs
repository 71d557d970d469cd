//! Sound propagation in a depth-stratified ocean channel.

use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use super::config::{OceanConfig, RunConfig};
use super::output::{write_csv, GridSnapshot};
use crate::error::Result;
use crate::semidisc::{
    Boundary, FieldState, FluxScheme, Medium, Mesh, Path, Semidiscretization, Source,
};
use crate::timestep::{evolve_semidiscrete, EvolveReport, Observer, TimeControls};

/// Sound speed at depth `d` (metres, positive downward).
pub fn sound_speed(d: f64) -> f64 {
    1450.0 + 50.0 * (100.0 / (d + 40.0) + ((d - 300.0) / 50.0).tanh())
}

/// Gaussian-mollified point source `A e^{−r²/2σ²} sin(2πft)`, switched off
/// at `cutoff`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSource {
    pub center: [f64; 2],
    pub sigma: f64,
    pub frequency: f64,
    pub amplitude: f64,
    pub cutoff: f64,
}

impl Source for GaussianSource {
    fn has_forcing(&self) -> bool {
        self.amplitude != 0.0
    }

    fn forcing(&self, x: &[f64], t: f64) -> f64 {
        if t >= self.cutoff {
            return 0.0;
        }
        let r2 = (x[0] - self.center[0]).powi(2) + (x[1] - self.center[1]).powi(2);
        self.amplitude
            * (-r2 / (2.0 * self.sigma * self.sigma)).exp()
            * (2.0 * std::f64::consts::PI * self.frequency * t).sin()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyRow {
    pub step: usize,
    pub t: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct OceanReport {
    pub evolve: EvolveReport,
    pub energy: Vec<EnergyRow>,
    pub snapshots: Vec<PathBuf>,
    pub mean_u_iterations: f64,
    pub mean_v_iterations: f64,
    /// Largest relative energy increase over one step after the cutoff.
    pub max_increase_after_cutoff: f64,
}

/// Channel mesh: `x ∈ [0, width]`, `y ∈ [−depth, 0]`, pressure-release
/// (Dirichlet) surface, Neumann elsewhere.
pub fn ocean_problem(
    o: &OceanConfig,
    degree: usize,
    rel_tol: f64,
    max_iter: usize,
) -> Result<Semidiscretization> {
    let bc = vec![
        Boundary::Neumann,
        Boundary::Neumann,
        Boundary::Neumann,
        Boundary::Dirichlet,
    ];
    let mesh = Mesh::new(
        o.elements.to_vec(),
        o.cells,
        vec![0.0, -o.depth],
        vec![o.width, 0.0],
        bc,
    )?;
    let h = mesh.cell_size(0).max(mesh.cell_size(1));
    let medium = Medium::variable(Arc::new(|x: &[f64]| sound_speed(-x[1]).powi(2)), &mesh);
    let source = GaussianSource {
        center: [o.source_x, -o.source_depth],
        sigma: o.sigma_cells * h,
        frequency: o.frequency,
        amplitude: o.amplitude,
        cutoff: o.source_cutoff,
    };
    Semidiscretization::new(
        mesh,
        degree,
        FluxScheme::preset(&o.flux, o.xi)?,
        medium,
        Arc::new(source),
        Path::Iterative { rel_tol, max_iter },
    )
}

struct Recorder<'a> {
    semi: &'a Semidiscretization,
    snap_times: Vec<f64>,
    dir: PathBuf,
    energy: Vec<EnergyRow>,
    written: Vec<PathBuf>,
}

impl Observer<FieldState> for Recorder<'_> {
    fn observe(&mut self, step: usize, t: f64, state: &FieldState) -> Result<()> {
        self.energy.push(EnergyRow {
            step,
            t,
            energy: self.semi.discrete_energy(state),
        });
        let eps = 1e-9 * t.abs().max(1.0);
        if let Some(pos) = self.snap_times.iter().position(|s| (s - t).abs() <= eps) {
            let s = self.snap_times.remove(pos);
            let path = self.dir.join(format!("u_t{s:.3}.txt"));
            GridSnapshot::of_displacement(self.semi, state)?.write(&path)?;
            self.written.push(path);
        }
        Ok(())
    }
}

/// Evolve the channel problem from rest, writing snapshots and the energy
/// ledger (`energy.csv`) into `out`.
pub fn run_solve_ocean(cfg: &RunConfig, out: &FsPath) -> Result<OceanReport> {
    cfg.validate()?;
    let o = &cfg.ocean;
    let (cfl, t_end) = (o.cfl, o.t_end);
    let semi = ocean_problem(o, cfg.degree, cfg.pcg_tol, cfg.pcg_max_iter)?;
    let h = semi.mesh().min_cell_size();
    let mut stops = o.snapshots.clone();
    stops.push(o.source_cutoff);
    let controls =
        TimeControls::from_cfl(cfl, t_end, h, semi.medium().max_speed())?.with_stops(stops);
    std::fs::create_dir_all(out)?;
    let mut rec = Recorder {
        semi: &semi,
        snap_times: o
            .snapshots
            .iter()
            .copied()
            .filter(|t| *t <= t_end)
            .collect(),
        dir: out.to_path_buf(),
        energy: Vec::new(),
        written: Vec::new(),
    };
    let init = semi.zero_state();
    let (_, evolve) = evolve_semidiscrete(&semi, init, &controls, &mut [&mut rec])?;
    write_csv(&out.join("energy.csv"), &rec.energy)?;
    let mut max_inc = 0.0f64;
    for w in rec.energy.windows(2) {
        if w[0].t >= o.source_cutoff - 1e-12 {
            let rel = (w[1].energy - w[0].energy) / w[0].energy.abs().max(f64::MIN_POSITIVE);
            max_inc = max_inc.max(rel);
        }
    }
    let tel = semi.telemetry();
    Ok(OceanReport {
        evolve,
        energy: rec.energy,
        snapshots: rec.written,
        mean_u_iterations: tel.mean_u_iterations(),
        mean_v_iterations: tel.mean_v_iterations(),
        max_increase_after_cutoff: max_inc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speed_at_300m() {
        assert!((sound_speed(300.0) - (1450.0 + 50.0 * 100.0 / 340.0)).abs() < 1e-10);
        assert!((sound_speed(300.0) - 1464.705882352941).abs() < 1e-9);
    }

    #[test]
    fn source_switches_off() {
        let s = GaussianSource {
            center: [0.0, 0.0],
            sigma: 1.0,
            frequency: 200.0,
            amplitude: 1.0,
            cutoff: 0.1,
        };
        assert!(s.forcing(&[0.0, 0.0], 0.001).abs() > 0.0);
        assert_eq!(s.forcing(&[0.0, 0.0], 0.1), 0.0);
    }
}
