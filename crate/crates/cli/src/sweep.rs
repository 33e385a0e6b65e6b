//! Parameter sweeps: the cartesian product of `key=v1,v2,...` variations,
//! each run as an isolated pipeline in its own subdirectory.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::config::{apply_override, ConfigError, ExperimentConfig};
use crate::pipeline::{run_pipeline, worker_count, PipelineError};
use crate::report::write_json;

#[derive(Debug, Clone)]
pub struct Variation {
    pub key: String,
    pub values: Vec<String>,
}

impl std::str::FromStr for Variation {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let (key, vals) = s
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("variation `{s}` is not key=v1,v2,...")))?;
        let values: Vec<String> = vals.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
        if values.is_empty() {
            return Err(ConfigError(format!("variation `{s}` has no values")));
        }
        Ok(Self { key: key.trim().to_string(), values })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRun {
    pub index: usize,
    pub overrides: Vec<String>,
    pub output: PathBuf,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub runs: Vec<SweepRun>,
}

impl SweepSummary {
    pub fn exit_code(&self) -> i32 {
        self.runs.iter().map(|r| r.exit_code).max().unwrap_or(0)
    }
}

/// Expands the variations, validates every resulting config, then runs them
/// on at most [`worker_count`] threads. Writes `sweep.json` under the base
/// output directory.
pub fn run_sweep(base: &ExperimentConfig, vary: &[Variation]) -> Result<SweepSummary, PipelineError> {
    let base_table = toml::Table::try_from(base).map_err(|e| ConfigError(e.to_string()))?;
    let mut combos: Vec<Vec<String>> = vec![Vec::new()];
    for v in vary {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                v.values.iter().map(move |val| {
                    let mut next = c.clone();
                    next.push(format!("{}={}", v.key, val));
                    next
                })
            })
            .collect();
    }
    let mut configs = Vec::with_capacity(combos.len());
    for (i, overrides) in combos.iter().enumerate() {
        let mut table = base_table.clone();
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut cfg = ExperimentConfig::from_table(table)?;
        cfg.output = base.output.join(format!("run-{i:03}"));
        cfg.validate().map_err(|e| ConfigError(format!("run {i} ({}): {e}", overrides.join(" "))))?;
        configs.push(cfg);
    }

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<SweepRun>>> = Mutex::new(vec![None; configs.len()]);
    let workers = worker_count().min(configs.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= configs.len() {
                    break;
                }
                let cfg = &configs[i];
                let (exit_code, error) = match run_pipeline(cfg) {
                    Ok(o) => (o.exit_code(), None),
                    Err(e) => (e.exit_code(), Some(e.to_string())),
                };
                let run = SweepRun { index: i, overrides: combos[i].clone(), output: cfg.output.clone(), exit_code, error };
                results.lock().expect("sweep results")[i] = Some(run);
            });
        }
    });
    let runs: Vec<SweepRun> = results.into_inner().expect("sweep results").into_iter().flatten().collect();
    let summary = SweepSummary { runs };
    std::fs::create_dir_all(&base.output)?;
    write_json(&base.output.join("sweep.json"), "sweep", &summary)?;
    Ok(summary)
}
