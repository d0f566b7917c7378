//! Experiment execution: seeded parallel chains, per-chain artifacts, and a
//! merged summary.
//!
//! Layout of a run directory:
//!
//! ```text
//! <out>/config.resolved.toml   fully explicit configuration echo
//! <out>/chain_00.trace.csv     one trace per chain
//! <out>/chain_00.report.json   one diagnostics report per chain
//! <out>/summary.csv            merged per-chain metric table
//! ```

use crate::diagnostics::{analyze_trace, DiagnosticsReport};
use crate::error::{Error, Result};
use crate::harness::build::{build_sampler, build_target};
use crate::harness::config::ExperimentConfig;
use crate::sampler::run_chain;
use crate::trace::ChainTrace;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// One chain's metrics, as written into `summary.csv`.
#[derive(Debug, Clone)]
pub struct ChainSummary {
    pub chain: usize,
    pub seed: u64,
    pub report: DiagnosticsReport,
}

/// Everything a finished (possibly partial) run produced.
#[derive(Debug)]
pub struct RunSummary {
    pub directory: PathBuf,
    pub chains: Vec<ChainSummary>,
    /// Error from the first failed chain, when the run was partial.
    pub failure: Option<Error>,
}

impl RunSummary {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Runs every chain of the experiment, writing artifacts as described in the
/// module docs. Chains that finish are always flushed to disk, even when a
/// later chain fails.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_override: Option<&Path>,
) -> Result<RunSummary> {
    let config = config.clone().resolve();
    let out_dir: PathBuf = match out_override {
        Some(p) => p.to_path_buf(),
        None => PathBuf::from(config.output.directory.clone().expect("resolved")),
    };
    std::fs::create_dir_all(&out_dir)?;

    // echo the fully resolved configuration up front so even failed runs
    // record what was asked
    let mut echo = config.clone();
    echo.output.directory = Some(out_dir.to_string_lossy().into_owned());
    std::fs::write(out_dir.join("config.resolved.toml"), echo.to_toml()?)?;

    let target = build_target(&config.target)?;
    // fail fast on a bad sampler spec before spawning workers
    drop(build_sampler(&config, &target)?);

    let chains = config.experiment.chains.expect("resolved");
    let iterations = config.experiment.iterations;
    let burn_in = config.experiment.burn_in.expect("resolved");
    let resample_period = config.sampler.resample_period.expect("resolved");
    let threads = config.experiment.threads.expect("resolved");
    let diag_options = config.diagnostics_options();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;

    type ChainOutcome = (usize, u64, Result<(ChainTrace, DiagnosticsReport)>);
    let results: Vec<ChainOutcome> = pool.install(|| {
        use rayon::prelude::*;
        (0..chains)
            .into_par_iter()
            .map(|index| {
                let seed = config.chain_seed(index);
                let outcome = (|| {
                    let mut sampler = build_sampler(&config, &target)?;
                    let started = Instant::now();
                    let trace =
                        run_chain(sampler.as_mut(), iterations, burn_in, resample_period, seed)?;
                    let wall = started.elapsed().as_secs_f64();
                    let mut report = analyze_trace(&trace, Some(&target), &diag_options)?;
                    report.wall_time_seconds = Some(wall);
                    Ok((trace, report))
                })();
                (index, seed, outcome)
            })
            .collect()
    });

    // single collector writes all artifacts in chain order
    let mut summaries = Vec::new();
    let mut failure = None;
    for (index, seed, outcome) in results {
        match outcome {
            Ok((trace, report)) => {
                trace.save(out_dir.join(format!("chain_{index:02}.trace.csv")))?;
                let json = serde_json::to_string_pretty(&report)
                    .map_err(|e| Error::Config(format!("report serialization: {e}")))?;
                std::fs::write(out_dir.join(format!("chain_{index:02}.report.json")), json)?;
                summaries.push(ChainSummary {
                    chain: index,
                    seed,
                    report,
                });
            }
            Err(e) => {
                if failure.is_none() {
                    failure = Some(e);
                }
            }
        }
    }

    let mut summary = std::fs::File::create(out_dir.join("summary.csv"))?;
    writeln!(
        summary,
        "chain,seed,n_samples,acceptance_rate,ess_bw_min,ess_mbm,tv,mean_escape_time,wall_time_seconds"
    )?;
    for s in &summaries {
        writeln!(
            summary,
            "{},{},{},{},{},{},{},{},{}",
            s.chain,
            s.seed,
            s.report.n_samples,
            s.report.acceptance_rate,
            s.report.ess_bw_min,
            fmt_opt(s.report.ess_mbm),
            fmt_opt(s.report.tv),
            fmt_opt(s.report.mean_escape_time),
            fmt_opt(s.report.wall_time_seconds),
        )?;
    }
    summary.flush()?;

    Ok(RunSummary {
        directory: out_dir,
        chains: summaries,
        failure,
    })
}

/// Re-analyzes an existing trace CSV without re-sampling.
pub fn diagnose(
    trace_path: &Path,
    target: Option<&crate::targets::TargetDensity>,
    options: &crate::diagnostics::DiagnosticsOptions,
) -> Result<DiagnosticsReport> {
    let trace = ChainTrace::load(trace_path)?;
    analyze_trace(&trace, target, options)
}

/// Builds the comparison table across finished run directories. One row per
/// experiment; metrics averaged over chains; missing metrics stay blank.
pub fn compare(run_dirs: &[PathBuf]) -> Result<String> {
    let mut out = String::from(
        "experiment,sampler,target,chains,acceptance_rate,ess_bw_per_iter,ess_mbm_per_iter,\
         ess_bw_per_sec,ess_mbm_per_sec,mean_escape_time,tv\n",
    );
    for dir in run_dirs {
        let config_path = dir.join("config.resolved.toml");
        if !config_path.is_file() {
            return Err(Error::Config(format!(
                "missing run directory or config echo: {}",
                config_path.display()
            )));
        }
        let config = ExperimentConfig::from_toml(&std::fs::read_to_string(&config_path)?)?;
        let mut reports = Vec::new();
        for index in 0.. {
            let path = dir.join(format!("chain_{index:02}.report.json"));
            if !path.is_file() {
                break;
            }
            let report: DiagnosticsReport =
                serde_json::from_str(&std::fs::read_to_string(&path)?).map_err(|e| {
                    Error::Config(format!("bad report {}: {e}", path.display()))
                })?;
            reports.push(report);
        }
        if reports.is_empty() {
            return Err(Error::Config(format!(
                "no chain reports found in {}",
                dir.display()
            )));
        }
        let n = reports.len() as f64;
        let mean = |f: &dyn Fn(&DiagnosticsReport) -> Option<f64>| -> Option<f64> {
            let vals: Vec<f64> = reports.iter().filter_map(|r| f(r)).collect();
            (vals.len() == reports.len())
                .then(|| vals.iter().sum::<f64>() / n)
        };
        let acceptance = reports.iter().map(|r| r.acceptance_rate).sum::<f64>() / n;
        let ess_bw_iter = mean(&|r| Some(r.ess_bw_min / r.n_samples as f64));
        let ess_mbm_iter = mean(&|r| r.ess_mbm.map(|e| e / r.n_samples as f64));
        let ess_bw_sec = mean(&|r| {
            r.wall_time_seconds
                .filter(|&w| w > 0.0)
                .map(|w| r.ess_bw_min / w)
        });
        let ess_mbm_sec = mean(&|r| {
            match (r.ess_mbm, r.wall_time_seconds.filter(|&w| w > 0.0)) {
                (Some(e), Some(w)) => Some(e / w),
                _ => None,
            }
        });
        let escape = mean(&|r| r.mean_escape_time);
        let tv = mean(&|r| r.tv);
        let sampler_label = match &config.sampler.proposal {
            Some(p) => format!("{}/{}", config.sampler.name, p),
            None => config.sampler.name.clone(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            config.experiment.name,
            sampler_label,
            config.target.name,
            reports.len(),
            acceptance,
            fmt_opt(ess_bw_iter),
            fmt_opt(ess_mbm_iter),
            fmt_opt(ess_bw_sec),
            fmt_opt(ess_mbm_sec),
            fmt_opt(escape),
            fmt_opt(tv),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(out: &Path) -> ExperimentConfig {
        let text = format!(
            r#"
[experiment]
name = "tiny-mh"
iterations = 2000
burn_in = 200
chains = 2
seed = 11
threads = 1

[target]
name = "std-normal"
dim = 2

[sampler]
name = "mh"
proposal = "gaussian"
sigma = 1.7

[output]
directory = "{}"
"#,
            out.display()
        );
        ExperimentConfig::from_toml(&text).unwrap()
    }

    #[test]
    fn run_writes_all_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let summary = run_experiment(&small_config(&out), None).unwrap();
        assert!(summary.is_complete());
        assert_eq!(summary.chains.len(), 2);
        for name in [
            "config.resolved.toml",
            "chain_00.trace.csv",
            "chain_00.report.json",
            "chain_01.trace.csv",
            "chain_01.report.json",
            "summary.csv",
        ] {
            assert!(out.join(name).is_file(), "missing {name}");
        }
        // pairwise distinct chains under the xor seed derivation
        let a = ChainTrace::load(out.join("chain_00.trace.csv")).unwrap();
        let b = ChainTrace::load(out.join("chain_01.trace.csv")).unwrap();
        assert_ne!(a.state(0), b.state(0));
    }

    #[test]
    fn identical_seed_and_config_reproduce_traces_byte_for_byte() {
        let dir = tempfile::tempdir().unwrap();
        let out1 = dir.path().join("a");
        let out2 = dir.path().join("b");
        run_experiment(&small_config(&out1), None).unwrap();
        run_experiment(&small_config(&out2), None).unwrap();
        for name in ["chain_00.trace.csv", "chain_01.trace.csv"] {
            let x = std::fs::read(out1.join(name)).unwrap();
            let y = std::fs::read(out2.join(name)).unwrap();
            assert_eq!(x, y, "{name} differs between identical runs");
        }
        // reports match exactly once the wall-time field is removed
        for name in ["chain_00.report.json", "chain_01.report.json"] {
            let strip = |p: &Path| -> serde_json::Value {
                let mut v: serde_json::Value =
                    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
                v.as_object_mut().unwrap().remove("wall_time_seconds");
                v
            };
            assert_eq!(strip(&out1.join(name)), strip(&out2.join(name)));
        }
    }

    #[test]
    fn compare_produces_one_row_per_run() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        run_experiment(&small_config(&out), None).unwrap();
        let table = compare(&[out.clone()]).unwrap();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("tiny-mh,mh/gaussian,std-normal,2,"));
        // escape-time column empty for a non-bimodal target
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields[9], "", "escape column should be blank: {}", lines[1]);
    }

    #[test]
    fn compare_missing_directory_is_an_error() {
        let err = compare(&[PathBuf::from("/nonexistent/run")]).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/run"));
    }

    #[test]
    fn diagnose_is_pure() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        run_experiment(&small_config(&out), None).unwrap();
        let opts = crate::diagnostics::DiagnosticsOptions::default();
        let a = diagnose(&out.join("chain_00.trace.csv"), None, &opts).unwrap();
        let b = diagnose(&out.join("chain_00.trace.csv"), None, &opts).unwrap();
        assert_eq!(a.ess_bw_min, b.ess_bw_min);
        assert_eq!(a.ess_mbm, b.ess_mbm);
    }
}
