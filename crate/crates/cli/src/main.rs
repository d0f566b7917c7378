//! Experiment CLI: run presets or config files, compare finished runs, and
//! re-analyze traces.
//!
//! Every config key can also be overridden through the environment as
//! `IMCMC_<SECTION>_<KEY>` with TOML-syntax values, e.g.
//! `IMCMC_SAMPLER_EPSILON=0.5 imcmc run --preset stdnormal2-mala`.

use clap::{Args, Parser, Subcommand};
use imcmc::diagnostics::DiagnosticsOptions;
use imcmc::harness::{self, ExperimentConfig};
use imcmc::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "imcmc", version, about = "Irreversible MCMC experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a preset or a config file.
    Run(RunArgs),
    /// Merge finished run directories into one comparison table (CSV).
    Compare(CompareArgs),
    /// Re-analyze an existing trace CSV without re-sampling.
    Diagnose(DiagnoseArgs),
    /// List the shipped experiment presets.
    ListPresets,
}

#[derive(Args)]
struct RunArgs {
    /// Preset name (see list-presets).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Path to a TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the base RNG seed (chain i uses seed XOR i).
    #[arg(long)]
    seed: Option<u64>,
    /// Override the iteration count.
    #[arg(long)]
    iters: Option<usize>,
    /// Override the number of chains.
    #[arg(long)]
    chains: Option<usize>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the sampler name (hyperparameters come from config/env).
    #[arg(long)]
    sampler: Option<String>,
    /// Override the target name (parameters come from config/env).
    #[arg(long)]
    target: Option<String>,
    /// Worker threads (0 = available parallelism).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    /// Run directories produced by `imcmc run`.
    #[arg(required = true)]
    runs: Vec<PathBuf>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Trace CSV in the schema written by `imcmc run`.
    trace: PathBuf,
    /// Optional target for the TV distance (std-normal, log-normal, bimodal,
    /// moon, multimodal-preset).
    #[arg(long)]
    target: Option<String>,
    /// Target dimension (std-normal).
    #[arg(long)]
    dim: Option<usize>,
    /// Bimodal well separation.
    #[arg(long)]
    tau: Option<f64>,
    /// Histogram box, flattened: "lo,hi" (1D) or "lo,hi,lo,hi" (2D).
    #[arg(long)]
    tv_box: Option<String>,
    /// Histogram bins per dimension.
    #[arg(long, default_value_t = 100)]
    bins: usize,
    /// Bartlett window M (default min(3000, N/10)).
    #[arg(long)]
    ess_window: Option<usize>,
    /// Batch count for the MBM estimator (default floor(sqrt(N))).
    #[arg(long)]
    mbm_batches: Option<usize>,
    /// Use the batch-size-scaled MBM variant.
    #[arg(long)]
    mbm_standard: bool,
    /// Report escape times classified by the sign of z_0.
    #[arg(long)]
    escape_sign_z1: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) => ExitCode::from(2),
                Error::Numeric(_) => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Compare(args) => {
            let table = harness::compare(&args.runs)?;
            match args.out {
                Some(path) => std::fs::write(path, table)?,
                None => print!("{table}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Diagnose(args) => diagnose(args),
        Command::ListPresets => {
            for (name, desc) in harness::preset_listing() {
                println!("{name:32} {desc}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run(args: RunArgs) -> Result<ExitCode, Error> {
    let text = match (&args.preset, &args.config) {
        (Some(name), None) => harness::preset(name)?.to_toml()?,
        (None, Some(path)) => std::fs::read_to_string(path)?,
        _ => {
            return Err(Error::Config(
                "run needs exactly one of --preset or --config".into(),
            ))
        }
    };
    let text = harness::apply_env_overrides(&text, std::env::vars())?;
    let mut config = ExperimentConfig::from_toml(&text)?;
    if let Some(seed) = args.seed {
        config.experiment.seed = Some(seed);
    }
    if let Some(iters) = args.iters {
        config.experiment.iterations = iters;
        // a stale burn-in from the preset could now exceed the run length
        if config.experiment.burn_in.is_some_and(|b| b >= iters) {
            config.experiment.burn_in = Some(iters / 10);
        }
    }
    if let Some(chains) = args.chains {
        config.experiment.chains = Some(chains);
    }
    if let Some(threads) = args.threads {
        config.experiment.threads = Some(threads);
    }
    if let Some(sampler) = args.sampler {
        config.sampler.name = sampler;
    }
    if let Some(target) = args.target {
        config.target.name = target;
    }
    let summary = harness::run_experiment(&config, args.out.as_deref())?;
    println!(
        "wrote {} chain(s) to {}",
        summary.chains.len(),
        summary.directory.display()
    );
    match summary.failure {
        None => Ok(ExitCode::SUCCESS),
        Some(e) => {
            eprintln!("error: partial run, artifacts flushed: {e}");
            Ok(ExitCode::from(3))
        }
    }
}

fn diagnose(args: DiagnoseArgs) -> Result<ExitCode, Error> {
    let target = match &args.target {
        None => None,
        Some(name) => {
            let section = imcmc::harness::config::TargetSection {
                name: name.clone(),
                dim: args.dim,
                tau: args.tau,
                means: None,
                weights: None,
                scales: None,
                dataset: None,
                label_column: None,
                standardize: None,
                prior_alpha: None,
            };
            Some(harness::build_target(&section)?)
        }
    };
    let tv_box = match &args.tv_box {
        None => None,
        Some(raw) => Some(parse_box(raw)?),
    };
    let options = DiagnosticsOptions {
        ess_window: args.ess_window,
        mbm_batches: args.mbm_batches,
        mbm_standard_variant: args.mbm_standard,
        tv_box,
        tv_bins_per_dim: args.bins,
        acf_lags: 50,
        escape_by_sign_z1: args.escape_sign_z1,
    };
    let report = harness::diagnose(&args.trace, target.as_ref(), &options)?;
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Config(format!("report serialization: {e}")))?;
    println!("{json}");
    Ok(ExitCode::SUCCESS)
}

fn parse_box(raw: &str) -> Result<Vec<(f64, f64)>, Error> {
    let values: Result<Vec<f64>, _> = raw.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let values =
        values.map_err(|_| Error::Config(format!("cannot parse box '{raw}': expected numbers")))?;
    if values.is_empty() || values.len() % 2 != 0 {
        return Err(Error::Config(format!(
            "box '{raw}' needs an even number of bounds (lo,hi per dimension)"
        )));
    }
    Ok(values.chunks(2).map(|c| (c[0], c[1])).collect())
}
