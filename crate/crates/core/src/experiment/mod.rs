//! Batch experiments: run solver variants over an instance directory, then
//! aggregate the results into performance profiles and per-set summaries.

mod profile;
mod summary;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bnb::{solve_exact, SearchLimits};
use crate::heuristics::{time_windows, warm_start};
use crate::instance::{robustify, Budget, InstanceError, ProjectInstance};
use crate::milp::{build_compact, solve_external, warm_start_assignment, BridgeLimits, CompactOptions, SolveStatus};

pub use profile::{performance_profile, PerformanceProfile};
pub use summary::{instance_set_label, summarize, SummaryRow};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad config: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0} records for instance {1} (Γ = {2}) and variant {3}")]
    Records(&'static str, String, usize, String),
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "basic")]
    Basic,
    #[serde(rename = "trans")]
    Trans,
    #[serde(rename = "warm")]
    Warm,
    #[serde(rename = "warm+trans")]
    WarmTrans,
    #[serde(rename = "bnb")]
    Bnb,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Basic,
        Variant::Trans,
        Variant::Warm,
        Variant::WarmTrans,
        Variant::Bnb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Basic => "basic",
            Variant::Trans => "trans",
            Variant::Warm => "warm",
            Variant::WarmTrans => "warm+trans",
            Variant::Bnb => "bnb",
        }
    }

    pub fn needs_bridge(self) -> bool {
        self != Variant::Bnb
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| ExperimentError::Config(format!("unknown variant `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instances_dir: PathBuf,
    pub gammas: Vec<usize>,
    pub variants: Vec<Variant>,
    pub time_limit_s: f64,
    #[serde(default)]
    pub bridge_cmd: Option<String>,
    #[serde(default)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        if cfg.instances_dir.is_relative() {
            if let Some(parent) = path.parent() {
                cfg.instances_dir = parent.join(&cfg.instances_dir);
            }
        }
        Ok(cfg)
    }
}

/// One solve of one instance at one budget by one variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub instance: String,
    pub gamma: usize,
    pub variant: String,
    /// `optimal`, `feasible`, `infeasible`, `timeout`, `error` or `skipped`.
    pub status: String,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    pub time_s: f64,
}

impl ResultRecord {
    pub fn is_solved(&self) -> bool {
        self.status == "optimal"
    }
}

pub const RESULTS_HEADER: &str = "instance,gamma,variant,status,objective,bound,gap,time_s";

fn gap(objective: Option<f64>, bound: Option<f64>, optimal: bool) -> Option<f64> {
    if optimal {
        return Some(0.0);
    }
    match (objective, bound) {
        (Some(o), Some(b)) if o > 0.0 => Some((100.0 * (o - b.min(o)) / o).max(0.0)),
        _ => None,
    }
}

/// Instance files (`.sm`, `.json`) of a directory, sorted by name.
pub fn instance_files(dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    let entries = std::fs::read_dir(dir).map_err(|source| ExperimentError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && matches!(p.extension().and_then(|e| e.to_str()), Some("sm") | Some("json")))
        .collect();
    files.sort();
    Ok(files)
}

/// Loads an instance for the pipeline: PSPLIB files are robustified, JSON
/// files are used as stored.
pub fn load_for_experiment(path: &Path) -> Result<ProjectInstance, InstanceError> {
    let inst = ProjectInstance::load(path)?;
    if path.extension().and_then(|e| e.to_str()) == Some("sm") {
        Ok(robustify(&inst))
    } else {
        Ok(inst)
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn record(instance: &str, gamma: usize, variant: Variant, status: &str, time_s: f64) -> ResultRecord {
    ResultRecord {
        instance: instance.to_string(),
        gamma,
        variant: variant.to_string(),
        status: status.to_string(),
        objective: None,
        bound: None,
        gap: None,
        time_s,
    }
}

/// Runs a single `(instance, Γ, variant)` job.
pub fn run_one(
    inst: &ProjectInstance,
    gamma: usize,
    variant: Variant,
    time_limit_s: f64,
    bridge_cmd: Option<&str>,
) -> ResultRecord {
    let name = inst.name();
    let started = Instant::now();
    if Budget::new(gamma, inst).is_err() {
        return record(name, gamma, variant, "error", 0.0);
    }
    if variant == Variant::Bnb {
        let limits = SearchLimits {
            time_s: Some(time_limit_s),
            node_cap: None,
        };
        return match solve_exact(inst, gamma, limits, None) {
            Ok(res) => {
                let optimal = res.is_optimal();
                let objective = Some(res.value as f64);
                let bound = Some(res.bound as f64);
                ResultRecord {
                    status: if optimal { "optimal" } else { "feasible" }.to_string(),
                    objective,
                    bound,
                    gap: gap(objective, bound, optimal),
                    ..record(name, gamma, variant, "", res.time_s)
                }
            }
            Err(_) => record(name, gamma, variant, "error", started.elapsed().as_secs_f64()),
        };
    }
    let Some(cmd) = bridge_cmd else {
        return record(name, gamma, variant, "skipped", 0.0);
    };
    let warm = matches!(variant, Variant::Warm | Variant::WarmTrans);
    let ws = warm.then(|| warm_start(inst, gamma));
    let tighten = match &ws {
        Some(ws) => match time_windows(inst, ws.ub) {
            Ok(tw) => Some(tw),
            Err(_) => return record(name, gamma, variant, "error", 0.0),
        },
        None => None,
    };
    let opts = CompactOptions {
        transitivity: matches!(variant, Variant::Trans | Variant::WarmTrans),
        tighten,
        integral_starts: warm,
        ..Default::default()
    };
    let model = match build_compact(inst, gamma, &opts) {
        Ok(m) => m,
        Err(_) => return record(name, gamma, variant, "error", 0.0),
    };
    let assignment = ws.as_ref().map(|ws| warm_start_assignment(inst, ws));
    let out = solve_external(
        &model,
        assignment.as_ref(),
        &BridgeLimits {
            command: cmd.to_string(),
            time_s: time_limit_s,
        },
    );
    let optimal = out.status == SolveStatus::Optimal;
    ResultRecord {
        status: out.status.as_str().to_string(),
        objective: out.objective,
        bound: out.bound,
        gap: gap(out.objective, out.bound, optimal),
        ..record(name, gamma, variant, "", out.time_s)
    }
}

/// Every `(instance, Γ, variant)` combination of `config`, solved in a pool
/// of `workers` threads. Records come back in job order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRecord>, ExperimentError> {
    let files = instance_files(&config.instances_dir)?;
    let mut jobs = Vec::new();
    for file in &files {
        for &gamma in &config.gammas {
            for &variant in &config.variants {
                jobs.push((file.clone(), gamma, variant));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.unwrap_or(0))
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    let bridge = config.bridge_cmd.as_deref();
    let records = pool.install(|| {
        jobs.par_iter()
            .map(|(file, gamma, variant)| match load_for_experiment(file) {
                Ok(inst) => run_one(&inst, *gamma, *variant, config.time_limit_s, bridge),
                Err(_) => record(&stem(file), *gamma, *variant, "error", 0.0),
            })
            .collect()
    });
    Ok(records)
}

pub fn write_results_csv(records: &[ResultRecord]) -> Result<String, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if records.is_empty() {
        return Ok(format!("{RESULTS_HEADER}\n"));
    }
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn read_results_csv(text: &str) -> Result<Vec<ResultRecord>, ExperimentError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

/// Writes `results.csv`, `profile.csv`, `profile.svg` and `summary.csv`.
pub fn write_outputs(dir: &Path, records: &[ResultRecord]) -> Result<(), ExperimentError> {
    let io = |path: &Path| {
        let p = path.display().to_string();
        move |source| ExperimentError::Io { path: p, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let results = dir.join("results.csv");
    std::fs::write(&results, write_results_csv(records)?).map_err(io(&results))?;
    let mut variants: Vec<String> = Vec::new();
    for r in records {
        if !variants.contains(&r.variant) {
            variants.push(r.variant.clone());
        }
    }
    let profile = performance_profile(records, &variants)?;
    let p = dir.join("profile.csv");
    std::fs::write(&p, profile.to_csv()).map_err(io(&p))?;
    let p = dir.join("profile.svg");
    std::fs::write(&p, profile.to_svg()).map_err(io(&p))?;
    let p = dir.join("summary.csv");
    std::fs::write(&p, summary::to_csv(&summarize(records))).map_err(io(&p))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.as_str().parse::<Variant>().unwrap(), v);
        }
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"instances_dir":"x","gammas":[3,5,7],"variants":["warm+trans","bnb"],"time_limit_s":1}"#,
        )
        .unwrap();
        assert_eq!(cfg.variants, vec![Variant::WarmTrans, Variant::Bnb]);
        assert!(cfg.bridge_cmd.is_none());
    }

    #[test]
    fn csv_header_is_fixed() {
        let r = record("j301_1", 3, Variant::Bnb, "optimal", 0.5);
        let text = write_results_csv(std::slice::from_ref(&r)).unwrap();
        assert_eq!(text.lines().next(), Some(RESULTS_HEADER));
        assert_eq!(read_results_csv(&text).unwrap(), vec![r]);
        assert_eq!(write_results_csv(&[]).unwrap().trim(), RESULTS_HEADER);
    }

    #[test]
    fn gaps() {
        assert_eq!(gap(Some(100.0), Some(80.0), false), Some(20.0));
        assert_eq!(gap(Some(3.0), Some(3.0), true), Some(0.0));
        assert_eq!(gap(None, Some(3.0), false), None);
    }

    #[test]
    fn milp_variants_skip_without_bridge() {
        let inst = crate::reference::pair_conflict_instance();
        let r = run_one(&inst, 1, Variant::Warm, 1.0, None);
        assert_eq!(r.status, "skipped");
        let r = run_one(&inst, 1, Variant::Bnb, 1.0, None);
        assert_eq!(r.status, "optimal");
        assert_eq!(r.objective, Some(3.0));
        assert_eq!(r.gap, Some(0.0));
    }
}
