//! Parameter sweeps behind the `diffint` command-line tool.
//!
//! Settings are resolved in three layers: built-in defaults, then an
//! optional TOML file, then command-line flags.

pub mod cli;
pub mod config;
pub mod run;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind, Grid, NoiseSpec, ProbeKind};
pub use run::{execute, qfi_row, run, Cell, Manifest, QfiRow, RunError, RunOutput, Table};
