//! Experiment matrix: targets × variants × trials, with aggregation and
//! CSV/JSON output.
//!
//! An experiment is a JSON file:
//!
//! ```json
//! {
//!   "targets": ["corpus/parity.qa", "corpus/toggle_sum.qa"],
//!   "variants": ["S-VE", "W-CC-VE"],
//!   "ablations": { "ids": true, "cex_expansion": true },
//!   "trials": 5,
//!   "seed": 1,
//!   "limits": { "max_steps": 20000, "time_limit_ms": 120000 },
//!   "timing": false
//! }
//! ```
//!
//! Target paths are relative to the experiment file. The learners and the
//! simulated teacher are deterministic, so the seed is only echoed into the
//! result. With `timing` off the solver time is reported as zero and output
//! files are byte-identical across runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automaton::{check_label_equivalence, parse, QuantitativeAutomaton, ValuationKind};
use crate::error::{Error, Result};
use crate::learner::{run_quintic, run_remap, Outcome, RunLimits, RunMetrics, Variant};
use crate::teacher::SimulatedTeacher;

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ablations {
    #[serde(default = "yes")]
    pub ids: bool,
    #[serde(default = "yes")]
    pub cex_expansion: bool,
}

impl Default for Ablations {
    fn default() -> Self {
        Ablations {
            ids: true,
            cex_expansion: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub targets: Vec<PathBuf>,
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub ablations: Ablations,
    pub trials: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub limits: RunLimits,
    /// Report solver wall time; off keeps outputs reproducible.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        if spec.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if spec.targets.is_empty() || spec.variants.is_empty() {
            return Err(Error::Config("need at least one target and one variant".into()));
        }
        Ok(spec)
    }
}

/// One learner run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub target: String,
    pub variant: Variant,
    pub trial: u32,
    pub success: bool,
    /// Budget-exceeded reason, or why the learned machine was rejected.
    pub failure: Option<String>,
    pub states: Option<usize>,
    pub metrics: RunMetrics,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Stat {
        if xs.is_empty() {
            return Stat::default();
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Stat {
            mean,
            std: var.sqrt(),
        }
    }
}

pub const METRIC_NAMES: [&str; 8] = [
    "pref_queries",
    "equiv_queries",
    "inequality_count",
    "variable_count",
    "unknown_pair_count",
    "maxsmt_solves",
    "solver_time_ms",
    "backtracks",
];

fn metric_values(m: &RunMetrics) -> [f64; 8] {
    [
        m.pref_queries as f64,
        m.equiv_queries as f64,
        m.inequality_count as f64,
        m.variable_count as f64,
        m.unknown_pair_count as f64,
        m.maxsmt_solves as f64,
        m.solver_time_ms,
        m.backtracks as f64,
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub target: String,
    pub variant: Variant,
    /// Metric name to mean and deviation, in [`METRIC_NAMES`] order.
    pub metrics: BTreeMap<String, Stat>,
    pub trials: u32,
    pub failures: u32,
}

impl AggregateRow {
    pub fn stat(&self, metric: &str) -> Stat {
        self.metrics.get(metric).copied().unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixResult {
    pub seed: u64,
    pub trials: Vec<TrialRecord>,
    pub rows: Vec<AggregateRow>,
}

/// Reads `*.qa` files of a directory in name order.
pub fn load_corpus(dir: &Path) -> Result<Vec<(String, QuantitativeAutomaton)>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qa"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_target(p)).collect()
}

pub fn load_target(path: &Path) -> Result<(String, QuantitativeAutomaton)> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let text = std::fs::read_to_string(path)?;
    Ok((name, parse(&text)?))
}

fn run_trial(
    name: &str,
    target: &QuantitativeAutomaton,
    variant: Variant,
    trial: u32,
    spec: &ExperimentSpec,
) -> Result<TrialRecord> {
    let mut teacher = SimulatedTeacher::new(target.clone());
    let result = match variant.config() {
        Some(mut cfg) => {
            cfg.ids_enabled = spec.ablations.ids;
            cfg.cex_expansion_enabled = spec.ablations.cex_expansion;
            cfg.limits = spec.limits.clone();
            run_quintic(&mut teacher, &cfg)?
        }
        None => run_remap(&mut teacher)?,
    };
    let mut metrics = result.metrics.clone();
    if !spec.timing {
        metrics.solver_time_ms = 0.0;
    }
    let (success, failure) = match &result.outcome {
        Outcome::Learned(a) => match check_label_equivalence(target, a)? {
            None => (true, None),
            Some(c) => (false, Some(format!("learned machine differs on {:?}", c.sequence))),
        },
        Outcome::BudgetExceeded(r) => (false, Some(r.clone())),
    };
    Ok(TrialRecord {
        target: name.to_string(),
        variant,
        trial,
        success,
        failure,
        states: result.learned().map(|a| a.num_states()),
        metrics,
    })
}

/// Runs every trial in parallel and aggregates per target and variant, in
/// the order targets and variants are listed.
pub fn run_matrix(spec: &ExperimentSpec, base_dir: &Path) -> Result<MatrixResult> {
    let targets = spec
        .targets
        .iter()
        .map(|p| load_target(&base_dir.join(p)))
        .collect::<Result<Vec<_>>>()?;
    for (name, t) in &targets {
        if spec.variants.contains(&Variant::Remap)
            && !matches!(t.valuation(), ValuationKind::Classification)
        {
            return Err(Error::Config(format!(
                "REMAP needs classification targets; {name} uses {}",
                t.valuation().name()
            )));
        }
    }
    let jobs: Vec<(usize, Variant, u32)> = (0..targets.len())
        .flat_map(|i| {
            spec.variants
                .iter()
                .flat_map(move |v| (0..spec.trials).map(move |k| (i, *v, k)))
        })
        .collect();
    let trials = jobs
        .par_iter()
        .map(|&(i, v, k)| run_trial(&targets[i].0, &targets[i].1, v, k, spec))
        .collect::<Result<Vec<_>>>()?;
    let rows = trials
        .chunks(spec.trials as usize)
        .map(aggregate)
        .collect();
    Ok(MatrixResult {
        seed: spec.seed,
        trials,
        rows,
    })
}

fn aggregate(trials: &[TrialRecord]) -> AggregateRow {
    let values: Vec<[f64; 8]> = trials.iter().map(|t| metric_values(&t.metrics)).collect();
    let metrics = METRIC_NAMES
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let col: Vec<f64> = values.iter().map(|v| v[j]).collect();
            (name.to_string(), Stat::of(&col))
        })
        .collect();
    AggregateRow {
        target: trials[0].target.clone(),
        variant: trials[0].variant,
        metrics,
        trials: trials.len() as u32,
        failures: trials.iter().filter(|t| !t.success).count() as u32,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// From a file extension; CSV unless it is `.json`.
    pub fn for_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// Header, then one line per row: target, variant, mean/std per metric,
/// trials and failures.
pub fn to_csv(rows: &[AggregateRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Config("nothing to emit".into()));
    }
    let mut out = String::from("target,variant");
    for m in METRIC_NAMES {
        let _ = write!(out, ",{m}_mean,{m}_std");
    }
    out.push_str(",trials,failures\n");
    for r in rows {
        let _ = write!(out, "{},{}", r.target, r.variant);
        for m in METRIC_NAMES {
            let s = r.stat(m);
            let _ = write!(out, ",{},{}", s.mean, s.std);
        }
        let _ = writeln!(out, ",{},{}", r.trials, r.failures);
    }
    Ok(out)
}

pub fn to_json(rows: &[AggregateRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Config("nothing to emit".into()));
    }
    Ok(serde_json::to_string_pretty(rows)? + "\n")
}

pub fn emit(rows: &[AggregateRow], path: &Path, format: Format) -> Result<()> {
    let text = match format {
        Format::Csv => to_csv(rows)?,
        Format::Json => to_json(rows)?,
    };
    std::fs::write(path, text)?;
    Ok(())
}
