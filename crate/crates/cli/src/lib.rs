//! Reproducible experiment runner: flat JSON configs, seed fan-out, and CSV
//! and JSON artifacts in a directory named by the config hash.

pub mod config;
pub mod output;
pub mod run;
pub mod validate;

pub use config::{Experiment, ExperimentConfig, Seeds};
pub use output::write_run;
pub use run::{run, RunError, RunOutput, RunRecord};
pub use validate::{validate, FieldError};
