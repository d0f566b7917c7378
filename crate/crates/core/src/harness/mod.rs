//! Experiment harness: configuration, presets, the run/compare/diagnose
//! entry points behind the CLI.

pub mod build;
pub mod config;
pub mod presets;
pub mod run;

pub use build::{build_dynamics, build_q, build_sampler, build_target, SAMPLER_NAMES, TARGET_NAMES};
pub use config::{apply_env_overrides, ExperimentConfig, ENV_PREFIX};
pub use presets::{preset, preset_listing, PRESETS};
pub use run::{compare, diagnose, run_experiment, ChainSummary, RunSummary};
