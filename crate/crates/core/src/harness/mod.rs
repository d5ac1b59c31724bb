//! Monte Carlo driver: per-trial pipelines with common random numbers,
//! sweeps, confidence intervals and the QT convergence trace.

pub mod config;
pub mod output;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{dft_codebook, generate_channels, trial_seed, ChannelSet, Codebook};
use crate::clustering::LinkageRule;
use crate::error::{Error, Result};
use crate::pipeline::{run_scheme, Objective, Scheme, SchemeOptions, SchemeOutcome};
use crate::baselines::KmeansOptions;

pub use config::{SimConfig, SweepVar, PRESETS};
pub use output::{emit_results, parse_csv, write_csv, write_json, OutputFormat, SweepRow, CSV_HEADER};

/// Outcome of one scheme on one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub trial: usize,
    pub seed: u64,
    pub scheme: String,
    pub se: f64,
    pub ee: f64,
    pub rates: Vec<f64>,
    pub outer_iterations: usize,
    /// C2/C3 could not be met and the C1-only fallback was used.
    pub infeasible: bool,
    pub wall_time_s: f64,
    /// Set when the trial failed (for example a singular ZF design); such
    /// records are excluded from the averages.
    pub error: Option<String>,
    #[serde(skip)]
    pub outcome: Option<SchemeOutcome<f64>>,
}

impl MetricsRecord {
    pub fn value(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Se => self.se,
            Objective::Ee => self.ee,
        }
    }
}

/// Display label: the scheme, plus the linkage rule when several are run.
pub fn scheme_label(scheme: Scheme, rule: LinkageRule, several: bool) -> String {
    let uses_agnes = !matches!(scheme, Scheme::Kmeans | Scheme::GainDiff);
    if several && uses_agnes {
        format!("{}[{}]", scheme.name(), rule.name())
    } else {
        scheme.name().to_string()
    }
}

fn scheme_options(config: &SimConfig, rule: LinkageRule, seed: u64) -> SchemeOptions {
    SchemeOptions {
        rule,
        semantics: config.semantics,
        kmeans: KmeansOptions { max_iterations: config.kmeans_max_iterations, restarts: config.kmeans_restarts },
        seed,
    }
}

/// Channel draw of trial `trial`; identical for every scheme.
pub fn trial_channels(config: &SimConfig, trial: usize) -> Result<(u64, ChannelSet<f64>)> {
    let seed = trial_seed(config.seed, trial as u64);
    Ok((seed, generate_channels::<f64>(config.k, config.n_bs, config.l, seed)?))
}

fn record(config: &SimConfig, channels: &ChannelSet<f64>, codebook: &Codebook<f64>, trial: usize, seed: u64, scheme: Scheme, rule: LinkageRule, label: String) -> MetricsRecord {
    let start = Instant::now();
    let params = config.system_params();
    let result = run_scheme(scheme, channels, config.g, codebook, &params, &scheme_options(config, rule, seed));
    let wall_time_s = start.elapsed().as_secs_f64();
    match result {
        Ok(out) => MetricsRecord {
            trial,
            seed,
            scheme: label,
            se: out.se,
            ee: out.ee,
            rates: out.rates.clone(),
            outer_iterations: out.outer_iterations,
            infeasible: out.infeasible,
            wall_time_s,
            error: None,
            outcome: Some(out),
        },
        Err(e) => MetricsRecord {
            trial,
            seed,
            scheme: label,
            se: f64::NAN,
            ee: f64::NAN,
            rates: Vec::new(),
            outer_iterations: 0,
            infeasible: false,
            wall_time_s,
            error: Some(e.to_string()),
            outcome: None,
        },
    }
}

/// Runs one scheme (with the configured linkage) on trial `trial`.
pub fn run_pipeline(config: &SimConfig, scheme: Scheme, trial: usize) -> Result<MetricsRecord> {
    config.validate()?;
    let (seed, channels) = trial_channels(config, trial)?;
    let codebook = dft_codebook::<f64>(config.n_bs, config.n_beam)?;
    Ok(record(config, &channels, &codebook, trial, seed, scheme, config.linkage, scheme.name().to_string()))
}

/// Every configured scheme (and linkage) on one shared channel draw.
pub fn run_trial(config: &SimConfig, codebook: &Codebook<f64>, trial: usize) -> Result<Vec<MetricsRecord>> {
    let (seed, channels) = trial_channels(config, trial)?;
    let rules = config.linkage_rules();
    let several = rules.len() > 1;
    let mut out = Vec::new();
    for &scheme in &config.schemes {
        let uses_agnes = !matches!(scheme, Scheme::Kmeans | Scheme::GainDiff);
        let scheme_rules: &[LinkageRule] = if uses_agnes { &rules } else { &rules[..1] };
        for &rule in scheme_rules {
            out.push(record(config, &channels, codebook, trial, seed, scheme, rule, scheme_label(scheme, rule, several)));
        }
    }
    Ok(out)
}

/// Mean and normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub half_width: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self { mean: f64::NAN, half_width: f64::NAN, n };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let half_width = if n > 1 {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            1.96 * var.sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, half_width, n }
    }

    pub fn lo(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.mean + self.half_width
    }
}

/// Summary of `a - b` over trials where both succeeded.
pub fn paired_gap(a: &[MetricsRecord], b: &[MetricsRecord], objective: Objective) -> Summary {
    let diffs: Vec<f64> = a
        .iter()
        .filter(|r| r.error.is_none())
        .filter_map(|ra| b.iter().find(|rb| rb.trial == ra.trial && rb.error.is_none()).map(|rb| ra.value(objective) - rb.value(objective)))
        .collect();
    Summary::of(&diffs)
}

/// Records of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub value: f64,
    pub config: SimConfig,
    pub records: Vec<MetricsRecord>,
}

impl PointResult {
    pub fn scheme(&self, label: &str) -> Vec<MetricsRecord> {
        self.records.iter().filter(|r| r.scheme == label).cloned().collect()
    }

    pub fn labels(&self) -> Vec<String> {
        let mut seen: Vec<String> = Vec::new();
        for r in &self.records {
            if !seen.contains(&r.scheme) {
                seen.push(r.scheme.clone());
            }
        }
        seen
    }

    pub fn summary(&self, label: &str, objective: Objective) -> Summary {
        let v: Vec<f64> = self.records.iter().filter(|r| r.scheme == label && r.error.is_none()).map(|r| r.value(objective)).collect();
        Summary::of(&v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub var: SweepVar,
    pub objective: Objective,
    pub points: Vec<PointResult>,
}

impl SweepResult {
    /// One row per (value, scheme).
    pub fn rows(&self) -> Vec<SweepRow> {
        let mut rows = Vec::new();
        for p in &self.points {
            for label in p.labels() {
                let s = p.summary(&label, self.objective);
                let infeasible = p.records.iter().filter(|r| r.scheme == label && r.infeasible).count();
                rows.push(SweepRow {
                    sweep_var: self.var.name().to_string(),
                    value: p.value,
                    scheme: label,
                    objective: self.objective.name().to_string(),
                    mean: s.mean,
                    ci95_lo: s.lo(),
                    ci95_hi: s.hi(),
                    trials: s.n,
                    infeasible_count: infeasible,
                });
            }
        }
        rows
    }
}

fn with_workers<R: Send>(workers: Option<usize>, job: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(job))
        }
    }
}

/// Runs all trials of every sweep point. Trials are independent work items;
/// results come back ordered by (point, trial) whatever the worker count.
pub fn run_sweep(config: &SimConfig) -> Result<SweepResult> {
    config.validate()?;
    let (var, points) = config.points()?;
    let jobs: Vec<(usize, usize)> = (0..points.len()).flat_map(|p| (0..config.trials).map(move |t| (p, t))).collect();
    let codebooks: Vec<Codebook<f64>> = points.iter().map(|(_, c)| dft_codebook::<f64>(c.n_bs, c.n_beam)).collect::<Result<_>>()?;
    let results: Vec<Result<Vec<MetricsRecord>>> = with_workers(config.workers, || {
        jobs.par_iter().map(|&(p, t)| run_trial(&points[p].1, &codebooks[p], t)).collect()
    })?;
    let mut out: Vec<PointResult> = points.into_iter().map(|(value, config)| PointResult { value, config, records: Vec::new() }).collect();
    for (&(p, _), res) in jobs.iter().zip(results) {
        out[p].records.extend(res?);
    }
    Ok(SweepResult { var, objective: config.objective, points: out })
}

/// Mean relative sum-rate error `(R_ite - R_hat) / R_hat` per QT iteration,
/// using the first allocation of each trial. Converged traces are padded
/// with zeros.
pub fn mmse_trace(records: &[MetricsRecord]) -> Vec<Summary> {
    let traces: Vec<Vec<f64>> = records
        .iter()
        .filter_map(|r| r.outcome.as_ref())
        .filter_map(|o| o.traces.first())
        .filter(|t| !t.is_empty())
        .map(|t| {
            let last = t.last().expect("nonempty").q;
            t.iter().map(|e| (e.q - last) / last).collect()
        })
        .collect();
    let depth = traces.iter().map(Vec::len).max().unwrap_or(0);
    (0..depth)
        .map(|i| {
            let col: Vec<f64> = traces.iter().map(|t| t.get(i).copied().unwrap_or(0.0)).collect();
            Summary::of(&col)
        })
        .collect()
}

/// Rows of the convergence trace (one per QT iteration and scheme).
pub fn trace_rows(sweep: &SweepResult) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for p in &sweep.points {
        for label in p.labels() {
            for (i, s) in mmse_trace(&p.scheme(&label)).into_iter().enumerate() {
                rows.push(SweepRow {
                    sweep_var: "iteration".into(),
                    value: i as f64,
                    scheme: label.clone(),
                    objective: "mmse".into(),
                    mean: s.mean,
                    ci95_lo: s.lo(),
                    ci95_hi: s.hi(),
                    trials: s.n,
                    infeasible_count: 0,
                });
            }
        }
    }
    rows
}
