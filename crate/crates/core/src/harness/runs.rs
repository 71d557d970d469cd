//! Convergence ladders, timing studies, dispersion and spectral-radius
//! sweeps.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Refinement, RunConfig};
use super::norms::{convergence_rate, error_norms};
use super::solutions::{quadratic_c2, Manufactured, SolutionId};
use crate::analysis::{
    classify_mode, dispersion_sweep, max_real_part, operator_spectrum, stable_cfl, ModeClass,
};
use crate::error::Result;
use crate::semidisc::{Medium, Mesh, Semidiscretization};
use crate::timestep::{evolve_semidiscrete, TimeControls};

/// One rung of a convergence ladder.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergeRow {
    pub n: usize,
    #[serde(rename = "N")]
    pub cells: usize,
    pub h: f64,
    pub dofs: usize,
    pub l2_error: f64,
    pub energy_error: f64,
    pub pcg_tol: f64,
    pub pcg_u_mean: f64,
    pub pcg_v_mean: f64,
    pub steps: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergeReport {
    pub rows: Vec<ConvergeRow>,
    pub l2_rate: f64,
    pub energy_rate: f64,
}

/// Semi-discretisation of the configured manufactured problem.
pub fn manufactured_problem(
    cfg: &RunConfig,
    elements: usize,
    cells: usize,
    step: usize,
) -> Result<(Semidiscretization, Manufactured)> {
    let sol = Manufactured::new(cfg.solution, cfg.speed);
    let mesh = Mesh::unit(cfg.dims(), elements, cells, cfg.boundary())?;
    let medium = match cfg.solution {
        SolutionId::Variable2d => Medium::variable(quadratic_c2(), &mesh),
        _ => Medium::Constant(cfg.speed),
    };
    let semi = Semidiscretization::new(
        mesh,
        cfg.degree,
        cfg.scheme()?,
        medium,
        Arc::new(sol),
        cfg.solver_path(step),
    )?;
    Ok((semi, sol))
}

/// Evolve the manufactured problem on one mesh and measure the errors at
/// `t_end`.
pub fn converge_point(
    cfg: &RunConfig,
    elements: usize,
    cells: usize,
    step: usize,
) -> Result<ConvergeRow> {
    let (semi, sol) = manufactured_problem(cfg, elements, cells, step)?;
    let init = semi.project(&|x| sol.u(x, 0.0), &|x| sol.v(x, 0.0), 0.0);
    let h = semi.mesh().min_cell_size();
    let controls = TimeControls::from_cfl(cfg.cfl, cfg.t_end, h, semi.medium().max_speed())?;
    let (fin, report) = evolve_semidiscrete(&semi, init, &controls, &mut [])?;
    let t = fin.t;
    let norms = error_norms(&semi, &fin, &|x| sol.eval(x, t));
    let tel = semi.telemetry();
    let pcg_tol = match semi.path() {
        crate::semidisc::Path::Iterative { rel_tol, .. } => rel_tol,
        _ => 0.0,
    };
    Ok(ConvergeRow {
        n: elements,
        cells,
        h,
        dofs: semi.mesh().total_dofs(),
        l2_error: norms.l2,
        energy_error: norms.energy,
        pcg_tol,
        pcg_u_mean: tel.mean_u_iterations(),
        pcg_v_mean: tel.mean_v_iterations(),
        steps: report.steps,
        wall_seconds: report.wall_seconds,
    })
}

/// Run every ladder point (concurrently) and fit rates against `h`.
pub fn run_converge(cfg: &RunConfig) -> Result<ConvergeReport> {
    cfg.validate()?;
    let rows: Vec<ConvergeRow> = cfg
        .ladder
        .par_iter()
        .enumerate()
        .map(|(step, &rung)| match cfg.refinement {
            Refinement::FixElements => converge_point(cfg, cfg.elements, rung, step),
            Refinement::FixCells => converge_point(cfg, rung, cfg.cells, step),
        })
        .collect::<Result<_>>()?;
    let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let l2: Vec<f64> = rows.iter().map(|r| r.l2_error).collect();
    let en: Vec<f64> = rows.iter().map(|r| r.energy_error).collect();
    let (l2_rate, energy_rate) = if rows.len() > 1 {
        (convergence_rate(&h, &l2), convergence_rate(&h, &en))
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(ConvergeReport {
        rows,
        l2_rate,
        energy_rate,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingRow {
    #[serde(rename = "N")]
    pub cells: usize,
    pub dofs: usize,
    pub steps: usize,
    pub flops_per_step: f64,
    pub wall_per_step: f64,
}

#[derive(Debug, Clone)]
pub struct TimingReport {
    pub rows: Vec<TimingRow>,
    pub flop_rate: f64,
    pub wall_rate: f64,
}

/// Fixed number of steps per ladder point (the ladder lists `N`). Points
/// run one after another so wall times do not compete; the ladder is swept
/// `timing_rounds` times and each point reports its fastest per-round
/// median step time.
pub fn run_timing(cfg: &RunConfig) -> Result<TimingReport> {
    cfg.validate()?;
    let mut problems = Vec::with_capacity(cfg.ladder.len());
    for (step, &cells) in cfg.ladder.iter().enumerate() {
        let (semi, sol) = manufactured_problem(cfg, cfg.elements, cells, step)?;
        let init = semi.project(&|x| sol.u(x, 0.0), &|x| sol.v(x, 0.0), 0.0);
        let h = semi.mesh().min_cell_size();
        let c = semi.medium().max_speed();
        let t_end = cfg.timing_steps as f64 * cfg.cfl * h / c;
        let controls =
            TimeControls::from_cfl(cfg.cfl, t_end, h, c)?.with_max_steps(cfg.timing_steps);
        problems.push((cells, semi, init, controls));
    }
    let mut rows: Vec<TimingRow> = Vec::with_capacity(problems.len());
    for round in 0..cfg.timing_rounds {
        for (i, (cells, semi, init, controls)) in problems.iter().enumerate() {
            semi.reset_telemetry();
            let (_, report) = evolve_semidiscrete(semi, init.clone(), controls, &mut [])?;
            let tel = semi.telemetry();
            let mut times = report.step_seconds.clone();
            times.sort_by(f64::total_cmp);
            let median = times[times.len() / 2];
            if round == 0 {
                rows.push(TimingRow {
                    cells: *cells,
                    dofs: semi.mesh().total_dofs(),
                    steps: report.steps,
                    flops_per_step: tel.flops as f64 / report.steps as f64,
                    wall_per_step: median,
                });
            } else {
                rows[i].wall_per_step = rows[i].wall_per_step.min(median);
            }
        }
    }
    let dofs: Vec<f64> = rows.iter().map(|r| r.dofs as f64).collect();
    let fl: Vec<f64> = rows.iter().map(|r| r.flops_per_step).collect();
    let wt: Vec<f64> = rows.iter().map(|r| r.wall_per_step).collect();
    let (flop_rate, wall_rate) = if rows.len() > 1 {
        (convergence_rate(&dofs, &fl), convergence_rate(&dofs, &wt))
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(TimingReport {
        rows,
        flop_rate,
        wall_rate,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DispersionRow {
    pub k: f64,
    pub mode: usize,
    pub omega_r: f64,
    pub omega_i: f64,
    pub physical: bool,
    pub class: &'static str,
    pub correlation: f64,
}

/// Bloch phases `K ∈ (0, 2π)` at cell midpoints of a uniform grid.
pub fn bloch_phases(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / points as f64)
        .collect()
}

pub fn run_dispersion(cfg: &RunConfig) -> Result<Vec<DispersionRow>> {
    cfg.validate()?;
    let ks = bloch_phases(cfg.k_points);
    let res = dispersion_sweep(
        cfg.degree,
        cfg.cells,
        &cfg.scheme()?,
        &ks,
        cfg.bloch_elements,
    )?;
    let mut rows = Vec::new();
    for (i, &k) in ks.iter().enumerate() {
        for (m, om) in res.omega[i].iter().enumerate() {
            let class = match classify_mode(*om, k, cfg.bloch_elements, 0.01) {
                ModeClass::Stationary => "stationary",
                ModeClass::Resolved => "resolved",
                ModeClass::Spurious => "spurious",
            };
            rows.push(DispersionRow {
                k,
                mode: m,
                omega_r: om.re,
                omega_i: om.im,
                physical: m == res.physical[i],
                class,
                correlation: res.correlation[i][m],
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpecradRow {
    pub p: usize,
    #[serde(rename = "N")]
    pub cells: usize,
    pub n: usize,
    pub flux: String,
    pub rho: f64,
    /// Over eigenvalues outside the zero cluster.
    pub max_real: f64,
    pub null_modes: usize,
    pub rho_h: f64,
    pub stable_cfl: f64,
}

#[derive(Debug, Clone)]
pub struct SpecradReport {
    pub rows: Vec<SpecradRow>,
    /// Log-log slope of `ρ` against `p`.
    pub rate: f64,
}

pub fn run_specrad(cfg: &RunConfig) -> Result<SpecradReport> {
    cfg.validate()?;
    let scheme = cfg.scheme()?;
    let rows: Vec<SpecradRow> = cfg
        .degrees
        .par_iter()
        .map(|&p| -> Result<SpecradRow> {
            let ev =
                operator_spectrum(p, cfg.cells, cfg.elements, &scheme, cfg.spectrum_bc.into())?;
            let rho = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let (max_real, null_modes) = max_real_part(&ev, 1e-5);
            let h = 1.0 / (cfg.elements * cfg.cells) as f64;
            Ok(SpecradRow {
                p,
                cells: cfg.cells,
                n: cfg.elements,
                flux: cfg.flux.clone(),
                rho,
                max_real,
                null_modes,
                rho_h: rho * h,
                stable_cfl: stable_cfl(rho, h, 1, 1.0),
            })
        })
        .collect::<Result<_>>()?;
    let ps: Vec<f64> = rows.iter().map(|r| r.p as f64).collect();
    let rhos: Vec<f64> = rows.iter().map(|r| r.rho).collect();
    let rate = if rows.len() > 1 {
        convergence_rate(&ps, &rhos)
    } else {
        f64::NAN
    };
    Ok(SpecradReport { rows, rate })
}
