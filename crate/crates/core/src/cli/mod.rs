//! Config-driven experiment runner behind the `floquet` binary.

mod config;
mod run;

pub use config::{
    load_experiment, resolve, validate_config, Diagnostics, Experiment, Issue, IssueKind,
    Overrides, RawConfig, Task, OUTPUT_DIR_ENV,
};
pub use run::{exit, render_diagnostics, run, write_atomic, RunOutcome, RunReport};
