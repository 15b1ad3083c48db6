//! Multi-trial harness: seed fan-out, convergence aggregation and the
//! percentage-of-improvement comparison.
//!
//! Trial `i` of a batch runs with `trial_seed(master_seed, i)`. Results are
//! collected by trial index, so the aggregate does not depend on whether the
//! trials ran serially or on a thread pool. Standard deviations are
//! population standard deviations (divide by the trial count).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::KnapsackInstance;
use crate::solver::{self, Algorithm, SolverConfig, TrialResult};

pub const CURVE_FILE: &str = "curve.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Weyl increment used to spread trial indices before mixing.
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer applied to `master ^ (GOLDEN_GAMMA * index)`.
///
/// Never change this: every published aggregate depends on it.
pub fn trial_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed ^ GOLDEN_GAMMA.wrapping_mul(index);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Scalar part of an aggregate, also the on-disk summary JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algorithm: Algorithm,
    pub pair_count: usize,
    pub n: usize,
    pub max_iter: usize,
    pub theta: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub mean_final_profit: f64,
    pub std_final_profit: f64,
    pub mean_last_update: f64,
    pub instance_file: String,
}

impl Summary {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        read_json(path.as_ref())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path.as_ref(), self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateStats {
    pub summary: Summary,
    /// Mean best-so-far profit per iteration.
    pub mean_curve: Vec<f64>,
    pub std_curve: Vec<f64>,
    pub min_curve: Vec<u64>,
    pub max_curve: Vec<u64>,
}

impl AggregateStats {
    /// Aggregates trials given in trial-index order.
    pub fn from_trials(
        config: &SolverConfig,
        results: &[TrialResult],
        master_seed: u64,
        instance_file: impl Into<String>,
    ) -> Result<Self> {
        if results.is_empty() {
            return Err(Error::invalid("at least one trial is required"));
        }
        let len = config.max_iter;
        if let Some(bad) = results.iter().find(|r| r.curve.len() != len) {
            return Err(Error::invalid(format!(
                "trial curve has {} points, expected {len}",
                bad.curve.len()
            )));
        }
        let mut mean_curve = Vec::with_capacity(len);
        let mut std_curve = Vec::with_capacity(len);
        let mut min_curve = Vec::with_capacity(len);
        let mut max_curve = Vec::with_capacity(len);
        let mut column = Vec::with_capacity(results.len());
        for t in 0..len {
            column.clear();
            column.extend(results.iter().map(|r| r.curve[t]));
            let (mean, std) = mean_std(column.iter().map(|&v| v as f64));
            mean_curve.push(mean);
            std_curve.push(std);
            min_curve.push(*column.iter().min().unwrap());
            max_curve.push(*column.iter().max().unwrap());
        }
        let (mean_final_profit, std_final_profit) =
            mean_std(results.iter().map(|r| r.best_profit as f64));
        let (mean_last_update, _) = mean_std(results.iter().map(|r| r.last_update_iter as f64));
        Ok(AggregateStats {
            summary: Summary {
                algorithm: config.algorithm(),
                pair_count: config.pair_count,
                n: config.population_size,
                max_iter: config.max_iter,
                theta: config.theta,
                trials: results.len(),
                master_seed,
                mean_final_profit,
                std_final_profit,
                mean_last_update,
                instance_file: instance_file.into(),
            },
            mean_curve,
            std_curve,
            min_curve,
            max_curve,
        })
    }
}

/// Two-pass mean and population standard deviation, summed in input order.
fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (sum, count) = values
        .clone()
        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    let mean = sum / count as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / count as f64;
    (mean, var.sqrt())
}

/// Runs `trials` independent trials. `config.seed` is ignored; trial `i`
/// uses `trial_seed(master_seed, i)`.
pub fn run_trial_set(
    config: &SolverConfig,
    inst: &KnapsackInstance,
    trials: usize,
    master_seed: u64,
    exec: Execution,
) -> Result<Vec<TrialResult>> {
    if trials == 0 {
        return Err(Error::invalid("trial count must be at least 1"));
    }
    config.validate()?;
    let one = |i: usize| {
        let cfg = SolverConfig {
            seed: trial_seed(master_seed, i as u64),
            ..*config
        };
        solver::run(&cfg, inst)
    };
    match exec {
        Execution::Serial => (0..trials).map(one).collect(),
        Execution::Parallel => (0..trials).into_par_iter().map(one).collect(),
    }
}

/// Runs the trials in parallel and aggregates them. The summary's
/// `instance_file` is set to [`KnapsackInstance::describe`].
pub fn run_trials(
    config: &SolverConfig,
    inst: &KnapsackInstance,
    trials: usize,
    master_seed: u64,
) -> Result<AggregateStats> {
    run_trials_with(config, inst, trials, master_seed, Execution::Parallel)
}

pub fn run_trials_with(
    config: &SolverConfig,
    inst: &KnapsackInstance,
    trials: usize,
    master_seed: u64,
    exec: Execution,
) -> Result<AggregateStats> {
    let results = run_trial_set(config, inst, trials, master_seed, exec)?;
    AggregateStats::from_trials(config, &results, master_seed, inst.describe())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub baseline: Summary,
    pub improved: Summary,
    pub poi_percent: f64,
}

impl ComparisonReport {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path.as_ref(), self)
    }
}

/// Relative reduction of the mean last-update iteration, in percent.
pub fn poi_percent(baseline_mean: f64, improved_mean: f64) -> Result<f64> {
    if baseline_mean == 0.0 {
        return Err(Error::UndefinedComparison(
            "baseline mean last-update iteration is zero".into(),
        ));
    }
    Ok((baseline_mean - improved_mean) / baseline_mean * 100.0)
}

/// Compares two summaries produced on the same instance and budget.
pub fn poi(baseline: &Summary, improved: &Summary) -> Result<ComparisonReport> {
    if baseline.instance_file != improved.instance_file {
        return Err(Error::Mismatch(format!(
            "instance `{}` vs `{}`",
            baseline.instance_file, improved.instance_file
        )));
    }
    if baseline.max_iter != improved.max_iter {
        return Err(Error::Mismatch(format!(
            "max_iter {} vs {}",
            baseline.max_iter, improved.max_iter
        )));
    }
    let poi_percent = poi_percent(baseline.mean_last_update, improved.mean_last_update)?;
    Ok(ComparisonReport {
        baseline: baseline.clone(),
        improved: improved.clone(),
        poi_percent,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    iteration: usize,
    mean_best: f64,
    std_best: f64,
    min_best: u64,
    max_best: u64,
}

/// Writes `curve.csv` and `summary.json` into `dir`, creating it if needed.
pub fn export_stats(stats: &AggregateStats, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let curve_path = dir.join(CURVE_FILE);
    let csv_err = |source| Error::Csv {
        path: curve_path.clone(),
        source,
    };
    let file = File::create(&curve_path).map_err(|e| Error::io(&curve_path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for t in 0..stats.mean_curve.len() {
        w.serialize(CurveRow {
            iteration: t + 1,
            mean_best: stats.mean_curve[t],
            std_best: stats.std_curve[t],
            min_best: stats.min_curve[t],
            max_best: stats.max_curve[t],
        })
        .map_err(csv_err)?;
    }
    if stats.mean_curve.is_empty() {
        w.write_record(["iteration", "mean_best", "std_best", "min_best", "max_best"])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(&curve_path, e))?;

    let summary_path = dir.join(SUMMARY_FILE);
    stats.summary.save(&summary_path)?;
    Ok((curve_path, summary_path))
}

/// Reads back what [`export_stats`] wrote.
pub fn import_stats(dir: impl AsRef<Path>) -> Result<AggregateStats> {
    let dir = dir.as_ref();
    let summary = Summary::load(dir.join(SUMMARY_FILE))?;
    let curve_path = dir.join(CURVE_FILE);
    let mut r = csv::Reader::from_path(&curve_path).map_err(|source| Error::Csv {
        path: curve_path.clone(),
        source,
    })?;
    let mut stats = AggregateStats {
        summary,
        mean_curve: Vec::new(),
        std_curve: Vec::new(),
        min_curve: Vec::new(),
        max_curve: Vec::new(),
    };
    for (t, row) in r.deserialize::<CurveRow>().enumerate() {
        let row = row.map_err(|source| Error::Csv {
            path: curve_path.clone(),
            source,
        })?;
        if row.iteration != t + 1 {
            return Err(Error::Format {
                path: curve_path,
                message: format!("row {} has iteration {}", t + 1, row.iteration),
            });
        }
        stats.mean_curve.push(row.mean_best);
        stats.std_curve.push(row.std_best);
        stats.min_curve.push(row.min_best);
        stats.max_curve.push(row.max_best);
    }
    if stats.mean_curve.len() != stats.summary.max_iter {
        return Err(Error::Format {
            path: curve_path,
            message: format!(
                "{} rows but max_iter is {}",
                stats.mean_curve.len(),
                stats.summary.max_iter
            ),
        });
    }
    Ok(stats)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}
