//! Classic fourth-order Runge–Kutta time stepping.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::semidisc::{FieldState, Semidiscretization};

/// Vector-space operations needed by the integrator.
pub trait OdeState: Clone {
    fn zeros_like(&self) -> Self;
    /// `self += a · x`
    fn axpy(&mut self, a: f64, x: &Self);
    fn set_time(&mut self, _t: f64) {}
    fn is_finite(&self) -> bool;
}

impl OdeState for FieldState {
    fn zeros_like(&self) -> Self {
        FieldState::zeros_like(self)
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        FieldState::axpy(self, a, x);
    }
    fn set_time(&mut self, t: f64) {
        self.t = t;
    }
    fn is_finite(&self) -> bool {
        FieldState::is_finite(self)
    }
}

impl OdeState for Vec<f64> {
    fn zeros_like(&self) -> Self {
        vec![0.0; self.len()]
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            *s += a * v;
        }
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

/// One RK4 step from `(t, y)`; exactly four right-hand side calls.
pub fn rk4_step<S, F>(y: &S, t: f64, dt: f64, rhs: &mut F) -> Result<S>
where
    S: OdeState,
    F: FnMut(f64, &S, &mut S) -> Result<()>,
{
    let mut k1 = y.zeros_like();
    let mut k2 = y.zeros_like();
    let mut k3 = y.zeros_like();
    let mut k4 = y.zeros_like();
    let mut stage = y.clone();
    stage.set_time(t);
    rhs(t, &stage, &mut k1)?;
    stage = y.clone();
    stage.axpy(0.5 * dt, &k1);
    stage.set_time(t + 0.5 * dt);
    rhs(t + 0.5 * dt, &stage, &mut k2)?;
    stage = y.clone();
    stage.axpy(0.5 * dt, &k2);
    stage.set_time(t + 0.5 * dt);
    rhs(t + 0.5 * dt, &stage, &mut k3)?;
    stage = y.clone();
    stage.axpy(dt, &k3);
    stage.set_time(t + dt);
    rhs(t + dt, &stage, &mut k4)?;
    let mut out = y.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    out.set_time(t + dt);
    Ok(out)
}

/// Step size and stopping rule.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeControls {
    pub dt: f64,
    pub t_end: f64,
    /// Intermediate times the integrator lands on exactly.
    pub stops: Vec<f64>,
    pub max_steps: Option<usize>,
}

impl TimeControls {
    /// `dt = cfl · h / c_max`.
    pub fn from_cfl(cfl: f64, t_end: f64, h: f64, c_max: f64) -> Result<Self> {
        let dt = cfl * h / c_max;
        if !(dt > 0.0) || !dt.is_finite() || !(t_end >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "invalid time controls: cfl={cfl}, h={h}, c_max={c_max}, t_end={t_end}"
            )));
        }
        Ok(Self {
            dt,
            t_end,
            stops: Vec::new(),
            max_steps: None,
        })
    }

    pub fn with_stops(mut self, mut stops: Vec<f64>) -> Self {
        stops.retain(|s| *s > 0.0 && *s < self.t_end);
        stops.sort_by(f64::total_cmp);
        self.stops = stops;
        self
    }

    pub fn with_max_steps(mut self, n: usize) -> Self {
        self.max_steps = Some(n);
        self
    }
}

/// Called before the first step (step 0) and after every step.
pub trait Observer<S> {
    fn observe(&mut self, step: usize, t: f64, state: &S) -> Result<()>;
}

impl<S, F: FnMut(usize, f64, &S) -> Result<()>> Observer<S> for F {
    fn observe(&mut self, step: usize, t: f64, state: &S) -> Result<()> {
        self(step, t, state)
    }
}

/// Records `(t, E)` after every step.
pub struct EnergyLog<'a> {
    semi: &'a Semidiscretization,
    pub entries: Vec<(f64, f64)>,
}

impl<'a> EnergyLog<'a> {
    pub fn new(semi: &'a Semidiscretization) -> Self {
        Self {
            semi,
            entries: Vec::new(),
        }
    }
}

impl Observer<FieldState> for EnergyLog<'_> {
    fn observe(&mut self, _step: usize, t: f64, state: &FieldState) -> Result<()> {
        self.entries.push((t, self.semi.discrete_energy(state)));
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvolveReport {
    pub steps: usize,
    pub final_time: f64,
    pub wall_seconds: f64,
    /// Wall time of each step in seconds.
    pub step_seconds: Vec<f64>,
}

/// Integrate from `t0` to `controls.t_end`, truncating the step that would
/// overshoot any stop or the final time.
pub fn evolve<S, F>(
    initial: S,
    t0: f64,
    controls: &TimeControls,
    rhs: &mut F,
    observers: &mut [&mut dyn Observer<S>],
) -> Result<(S, EvolveReport)>
where
    S: OdeState,
    F: FnMut(f64, &S, &mut S) -> Result<()>,
{
    let start = Instant::now();
    let mut y = initial;
    let mut t = t0;
    let mut report = EvolveReport::default();
    for o in observers.iter_mut() {
        o.observe(0, t, &y)?;
    }
    let eps = 1e-12 * controls.t_end.abs().max(1.0);
    let mut stops = controls
        .stops
        .iter()
        .copied()
        .filter(|s| *s > t0 + eps)
        .peekable();
    while t < controls.t_end - eps {
        if controls.max_steps.is_some_and(|m| report.steps >= m) {
            break;
        }
        let target = match stops.peek() {
            Some(&s) if s < controls.t_end => s,
            _ => controls.t_end,
        };
        let dt = if t + controls.dt > target - eps {
            target - t
        } else {
            controls.dt
        };
        let t_step = Instant::now();
        y = rk4_step(&y, t, dt, rhs)?;
        t = if (t + dt - target).abs() <= eps {
            target
        } else {
            t + dt
        };
        y.set_time(t);
        if stops.peek().is_some_and(|&s| (s - t).abs() <= eps) {
            stops.next();
        }
        report.steps += 1;
        report.step_seconds.push(t_step.elapsed().as_secs_f64());
        if !y.is_finite() {
            return Err(Error::NonFinite {
                step: report.steps,
                time: t,
            });
        }
        for o in observers.iter_mut() {
            o.observe(report.steps, t, &y)?;
        }
    }
    report.final_time = t;
    report.wall_seconds = start.elapsed().as_secs_f64();
    Ok((y, report))
}

/// Evolve a semi-discretisation; the state carries its own start time.
pub fn evolve_semidiscrete(
    semi: &Semidiscretization,
    initial: FieldState,
    controls: &TimeControls,
    observers: &mut [&mut dyn Observer<FieldState>],
) -> Result<(FieldState, EvolveReport)> {
    let t0 = initial.t;
    let mut rhs = |_t: f64, s: &FieldState, out: &mut FieldState| semi.rhs(s, out);
    evolve(initial, t0, controls, &mut rhs, observers)
}
