//! Configuration-driven scenario runner.

pub mod config;
pub mod output;
pub mod runner;
pub mod scenarios;
pub mod svg;

pub use config::{Metric, ScenarioConfig, StateConfig, StateRecipe};
pub use runner::{run_scenario, run_sweep, simulate, sweep, RunOptions, ScenarioResult};
