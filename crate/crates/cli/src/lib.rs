//! Scenario registry, configuration and run orchestration for the apkin
//! solvers.

pub mod build;
pub mod config;
pub mod registry;
pub mod runner;

pub use build::{prepare, Prepared};
pub use config::{ConfigError, Origin, Overrides, ScenarioConfig, Solver};
pub use registry::Registry;
pub use runner::{run, RunReport};
