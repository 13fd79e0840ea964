//! Batch runner for mitigation experiments: JSON configs in, CSV and
//! JSON-lines reports out.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod source;
pub mod validate;

use std::path::{Path, PathBuf};
use std::time::Instant;

use qem_core::sampler::Execution;

pub use config::{ExperimentConfig, MethodSpec, SourceSpec, SvMode};
pub use error::LabError;
pub use runner::{Outcome, RunOptions};
pub use validate::{diagnose, plan, Diagnostic, Plan, Severity};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QEMLAB_OUT_DIR";

#[derive(Debug, Clone, Default)]
pub struct RunArgs {
    pub config: PathBuf,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub exact_only: bool,
    pub write_shots: bool,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub outcomes: Vec<Outcome>,
    pub manifest: output::RunManifest,
}

fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// `--out`, then the config's `output_dir`, then the environment, then `qemlab-out`.
pub fn resolve_out_dir(args: &RunArgs, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(o) = &args.out {
        return o.clone();
    }
    if let Some(o) = &cfg.output_dir {
        return config_dir(&args.config).join(o);
    }
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("qemlab-out"))
}

/// Diagnostics for `path` without running anything.
pub fn validate_file(path: &Path) -> Result<Vec<Diagnostic>, LabError> {
    let (cfg, _) = match ExperimentConfig::load(path) {
        Ok(c) => c,
        Err(LabError::Schema(msgs)) => {
            return Ok(msgs
                .into_iter()
                .map(|message| Diagnostic {
                    severity: Severity::Schema,
                    message,
                })
                .collect())
        }
        Err(e) => return Err(e),
    };
    Ok(diagnose(&cfg, &config_dir(path)).0)
}

/// Validates, runs and writes a sweep. On a method failure the successful
/// experiments are still written before the error is returned.
pub fn run(args: &RunArgs) -> Result<RunSummary, LabError> {
    let t0 = Instant::now();
    let (cfg, bytes) = ExperimentConfig::load(&args.config)?;
    let out_dir = resolve_out_dir(args, &cfg);
    let seed = args.seed.unwrap_or(cfg.master_seed);
    let plan = plan(cfg, &config_dir(&args.config))?;
    let mut stages = vec![output::StageTiming {
        stage: "validate".into(),
        seconds: t0.elapsed().as_secs_f64(),
    }];

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| LabError::Schema(vec![format!("--jobs: {e}")]))?;
    let opts = RunOptions {
        exact_only: args.exact_only,
        keep_shots: args.write_shots,
        exec: Execution::Parallel,
    };

    let t1 = Instant::now();
    let points = pool
        .install(|| runner::points(&plan))
        .map_err(|e| LabError::Runtime {
            index: 0,
            what: "noisy states".into(),
            source: e,
        })?;
    stages.push(output::StageTiming {
        stage: "states".into(),
        seconds: t1.elapsed().as_secs_f64(),
    });

    let t2 = Instant::now();
    let results = pool.install(|| runner::run_all(&plan, &points, seed, opts));
    stages.push(output::StageTiming {
        stage: "experiments".into(),
        seconds: t2.elapsed().as_secs_f64(),
    });

    let t3 = Instant::now();
    output::create_dir(&out_dir)?;
    let mut outcomes = Vec::new();
    let mut entries = Vec::new();
    let mut first_err = None;
    let mut shot_files = Vec::new();
    for (exp, res) in results {
        let mut entry = output::ExperimentEntry {
            index: exp.index,
            method: plan.labels[exp.method_index].clone(),
            lambda: plan.lambdas[exp.lambda_index],
            observable: plan.config.observables[exp.observable_index].to_string(),
            status: "ok".into(),
            files: Vec::new(),
        };
        match res {
            Ok(o) => {
                entry.files = vec![output::RESULTS_CSV.into(), output::REPORTS_JSONL.into()];
                if let Some(batch) = o.sampled.as_ref().and_then(|s| s.batch.as_ref()) {
                    let name = format!("shots_{:04}.csv", exp.index);
                    let mut buf = Vec::new();
                    batch.write_csv(&mut buf).map_err(|e| LabError::Io {
                        path: out_dir.join(&name),
                        source: e,
                    })?;
                    output::write_file(&out_dir, &name, &buf)?;
                    entry.files.push(name.clone());
                    shot_files.push(name);
                }
                outcomes.push(o);
            }
            Err(e) => {
                entry.status = format!("failed: {e}");
                if first_err.is_none() {
                    first_err = Some(LabError::Runtime {
                        index: exp.index,
                        what: format!("{} at lambda {}", entry.method, entry.lambda),
                        source: e,
                    });
                }
            }
        }
        entries.push(entry);
    }

    let mut files = Vec::new();
    if !plan.config.methods.is_empty() {
        output::write_file(&out_dir, output::RESULTS_CSV, output::results_csv(&outcomes).as_bytes())?;
        let jsonl = output::reports_jsonl(&outcomes).map_err(|e| LabError::Io {
            path: out_dir.join(output::REPORTS_JSONL),
            source: e.into(),
        })?;
        output::write_file(&out_dir, output::REPORTS_JSONL, jsonl.as_bytes())?;
        files.push(output::RESULTS_CSV.to_string());
        files.push(output::REPORTS_JSONL.to_string());
        for (name, m) in output::PLOT_FILES {
            output::write_file(&out_dir, name, output::plot_csv(&outcomes, m).as_bytes())?;
            files.push(name.to_string());
        }
        files.extend(shot_files);
    }
    stages.push(output::StageTiming {
        stage: "write".into(),
        seconds: t3.elapsed().as_secs_f64(),
    });
    stages.push(output::StageTiming {
        stage: "total".into(),
        seconds: t0.elapsed().as_secs_f64(),
    });
    files.push(output::MANIFEST_JSON.to_string());
    let manifest = output::RunManifest {
        artifact: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: output::sha256_hex(&bytes),
        master_seed: seed,
        exact_only: args.exact_only,
        stages,
        experiments: entries,
        files,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    output::write_file(&out_dir, output::MANIFEST_JSON, text.as_bytes())?;

    match first_err {
        Some(e) => Err(e),
        None => Ok(RunSummary {
            out_dir,
            outcomes,
            manifest,
        }),
    }
}
