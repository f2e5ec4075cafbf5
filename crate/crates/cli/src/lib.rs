//! Experiment runner behind the `ppmrx` command.

pub mod config;
pub mod describe;
pub mod output;
pub mod run;

pub use config::{preset, ExperimentConfig, Format, Overrides, ReceiverSpec, PRESETS};
pub use describe::describe;
pub use output::{write_csv, write_json, write_rows};
pub use run::{run_experiment, Row, COLUMNS};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod guide {}
