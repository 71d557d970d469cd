//! Experiment drivers behind the command-line front end.

pub mod config;
pub mod norms;
pub mod ocean;
pub mod output;
pub mod runs;
pub mod solutions;

pub use config::{OceanConfig, PathKind, Refinement, RunConfig, SpectrumBc, SCHEMA_VERSION};
pub use norms::{convergence_rate, error_norms, ErrorNorms};
pub use ocean::{run_solve_ocean, sound_speed, GaussianSource, OceanReport};
pub use output::{write_csv, GridSnapshot};
pub use runs::{
    bloch_phases, converge_point, manufactured_problem, run_converge, run_dispersion, run_specrad,
    run_timing, ConvergeReport, ConvergeRow, DispersionRow, SpecradReport, SpecradRow,
    TimingReport, TimingRow,
};
pub use solutions::{quadratic_c2, ExactValues, Manufactured, SolutionId};
