use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gdwave::harness::{self, write_csv, RunConfig};
use gdwave::Error;

#[derive(Parser, Debug)]
#[command(
    name = "gdwave",
    version,
    about = "Energy-based DG wave solver with Galerkin difference elements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convergence ladder for a manufactured solution.
    Converge(Overrides),
    /// Bloch-wave dispersion relation of the 1D scheme.
    Dispersion(Overrides),
    /// Spectral radius of the 1D operator over a list of degrees.
    Specrad(Overrides),
    /// Cost per time step over a ladder of element resolutions.
    Timing(Overrides),
    /// Ocean-channel run with grid snapshots.
    Solve(Overrides),
}

#[derive(Args, Debug)]
struct Overrides {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Polynomial degree.
    #[arg(long)]
    p: Option<usize>,
    /// Cells per element and axis.
    #[arg(long = "N")]
    cells: Option<usize>,
    /// Elements per axis.
    #[arg(long = "n")]
    elements: Option<usize>,
    /// Flux preset: central, alternating or upwind.
    #[arg(long)]
    flux: Option<String>,
    /// Upwind splitting parameter.
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Validation(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Solver(e.to_string())
        }
    }
}

fn load(o: &Overrides, solve: bool) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::load(&o.config)
        .map_err(|e| Failure::Validation(format!("cannot load {}: {e}", o.config.display())))?;
    if let Some(p) = o.p {
        cfg.degree = p;
    }
    if solve {
        if o.elements.is_some() {
            return Err(Failure::Validation(
                "--n is not used by solve; set ocean.elements in the config".into(),
            ));
        }
        if let Some(n) = o.cells {
            cfg.ocean.cells = n;
        }
        if let Some(f) = &o.flux {
            cfg.ocean.flux = f.clone();
        }
        if let Some(x) = o.xi {
            cfg.ocean.xi = x;
        }
        if let Some(c) = o.cfl {
            cfg.ocean.cfl = c;
        }
        if let Some(t) = o.t_end {
            cfg.ocean.t_end = t;
        }
    } else {
        if let Some(n) = o.cells {
            cfg.cells = n;
        }
        if let Some(n) = o.elements {
            cfg.elements = n;
        }
        if let Some(f) = &o.flux {
            cfg.flux = f.clone();
        }
        if let Some(x) = o.xi {
            cfg.xi = x;
        }
        if let Some(c) = o.cfl {
            cfg.cfl = c;
        }
        if let Some(t) = o.t_end {
            cfg.t_end = t;
        }
    }
    if let Some(out) = &o.out {
        cfg.out = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("GDWAVE_THREADS") else {
        return Ok(());
    };
    let cap: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        Failure::Validation(format!(
            "GDWAVE_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    let available = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    rayon::ThreadPoolBuilder::new()
        .num_threads(cap.min(available))
        .build_global()
        .map_err(|e| Failure::Solver(e.to_string()))
}

fn csv_out<T: serde::Serialize>(dir: &Path, name: &str, rows: &[T]) -> Result<PathBuf, Failure> {
    let path = dir.join(name);
    write_csv(&path, rows)?;
    Ok(path)
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Converge(o) => {
            let cfg = load(&o, false)?;
            let r = harness::run_converge(&cfg)?;
            let path = csv_out(&cfg.out, "converge.csv", &r.rows)?;
            println!("l2_rate={:.3} energy_rate={:.3}", r.l2_rate, r.energy_rate);
            println!("wrote {}", path.display());
        }
        Command::Dispersion(o) => {
            let cfg = load(&o, false)?;
            let rows = harness::run_dispersion(&cfg)?;
            let path = csv_out(&cfg.out, "dispersion.csv", &rows)?;
            println!("wrote {}", path.display());
        }
        Command::Specrad(o) => {
            let cfg = load(&o, false)?;
            let r = harness::run_specrad(&cfg)?;
            let path = csv_out(&cfg.out, "specrad.csv", &r.rows)?;
            println!("rho_vs_p_slope={:.3}", r.rate);
            println!("wrote {}", path.display());
        }
        Command::Timing(o) => {
            let cfg = load(&o, false)?;
            let r = harness::run_timing(&cfg)?;
            let path = csv_out(&cfg.out, "timing.csv", &r.rows)?;
            println!(
                "flop_slope={:.3} wall_slope={:.3}",
                r.flop_rate, r.wall_rate
            );
            println!("wrote {}", path.display());
        }
        Command::Solve(o) => {
            let cfg = load(&o, true)?;
            let r = harness::run_solve_ocean(&cfg, &cfg.out)?;
            println!(
                "steps={} pcg_u_mean={:.2} pcg_v_mean={:.2} snapshots={}",
                r.evolve.steps,
                r.mean_u_iterations,
                r.mean_v_iterations,
                r.snapshots.len()
            );
            println!("wrote {}", cfg.out.join("energy.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("solver failure: {m}");
            ExitCode::from(3)
        }
    }
}
