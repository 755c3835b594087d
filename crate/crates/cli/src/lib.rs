//! Command-line sweeps over the dislocation Klein-Gordon spectrum.

pub mod config;
pub mod run;
pub mod table;

pub use config::{Format, RunArgs, RunConfig, ScenarioArg, UsageError};
pub use run::{current, spectrum, verify, Outcome};
