//! Command-line front end of the toolkit: experiment files, figure presets,
//! parameter sweeps and plot emission.

pub mod artifacts;
pub mod error;
pub mod experiment;
pub mod pipeline;
pub mod plot;
pub mod presets;
pub mod svg;
pub mod sweep;

pub use artifacts::{rediagnose, run_experiment, ResultRecord};
pub use error::CliError;
pub use experiment::{Diagnostic, ExperimentSpec, Target};
pub use sweep::SweepSpec;

/// Environment variable read when `--threads` is absent.
pub const THREADS_ENV: &str = "LINDSPEC_THREADS";
