//! Configuration and orchestration of the experiment pipelines.

pub mod commands;
pub mod config;

pub use commands::{
    bias_sweep, bounds_report, cmd_bias_sweep, cmd_bounds_report, cmd_compare, cmd_mixing_check, compare, compare_csv,
    mixing_check, BiasRow, BoundReport, CompareResult, MixingRow, SchemeCurve, TrialSummary,
};
pub use config::{BiasSweepConfig, ExperimentConfig, ExperimentSettings, MixingCheckConfig};
