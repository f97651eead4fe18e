//! Random-subsample protocol: for every training fraction, draw `replicates`
//! train/test partitions of a season, fit both models on the training part,
//! score them on the held-out part and average.
//!
//! Each (fraction, replicate) partition is drawn from its own RNG whose seed is
//! a SHA-256 digest of `(master_seed, fraction, replicate)`. Any split can be
//! regenerated on its own, and results do not depend on evaluation order or on
//! how many threads are used.

use std::borrow::Borrow;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ingest::{Game, Outcome, Season};
use crate::models::{
    self, bt_predicts_home_win, fit_bt, fit_mov, mov_predicts_home_win, prediction_credit, FitError, MetricError,
};

pub const DEFAULT_X_GRID: [f64; 7] = [0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875];
pub const DEFAULT_REPLICATES: usize = 100;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid protocol configuration: {0}")]
    Config(String),
    #[error("every {model} fit failed at fraction {fraction} ({failures} replicates): {last_error}")]
    AllReplicatesFailed {
        fraction: f64,
        model: &'static str,
        failures: usize,
        last_error: FitError,
    },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolConfig {
    pub x_grid: Vec<f64>,
    pub replicates: usize,
    pub master_seed: u64,
    pub bt_penalty: f64,
    pub mov_penalty: f64,
    pub bt_tolerance: f64,
    pub bt_max_iter: usize,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            x_grid: DEFAULT_X_GRID.to_vec(),
            replicates: DEFAULT_REPLICATES,
            master_seed: 0,
            bt_penalty: models::DEFAULT_PENALTY,
            mov_penalty: models::DEFAULT_PENALTY,
            bt_tolerance: models::DEFAULT_TOLERANCE,
            bt_max_iter: models::DEFAULT_MAX_ITER,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.x_grid.is_empty() {
            return Err(HarnessError::Config("training-fraction grid is empty".into()));
        }
        if let Some(f) = self.x_grid.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
            return Err(HarnessError::Config(format!("training fraction {f} is not strictly between 0 and 1")));
        }
        if self.replicates == 0 {
            return Err(HarnessError::Config("replicates must be at least 1".into()));
        }
        if !(self.bt_penalty > 0.0 && self.bt_penalty.is_finite()) {
            return Err(HarnessError::Config(format!("BT penalty must be positive, got {}", self.bt_penalty)));
        }
        if !(self.mov_penalty >= 0.0 && self.mov_penalty.is_finite()) {
            return Err(HarnessError::Config(format!("MOV penalty must be non-negative, got {}", self.mov_penalty)));
        }
        Ok(())
    }

    /// Validate against a concrete season: every fraction must leave a
    /// non-empty training and test set.
    pub fn validate_for(&self, season: &Season) -> Result<(), HarnessError> {
        self.validate()?;
        let n = season.games().len();
        for &f in &self.x_grid {
            let m = train_size(f, n);
            if m == 0 || m >= n {
                return Err(HarnessError::Config(format!(
                    "fraction {f} of {n} games gives {m} training games; need between 1 and {}",
                    n.saturating_sub(1)
                )));
            }
        }
        Ok(())
    }
}

/// Training-set size: `fraction * n` rounded half to even.
pub fn train_size(fraction: f64, n_games: usize) -> usize {
    (fraction * n_games as f64).round_ties_even() as usize
}

/// Stable per-split seed derived from `(master_seed, fraction, replicate)`.
pub fn split_seed(master_seed: u64, fraction: f64, replicate: usize) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"season-info/split/v1");
    hasher.update(master_seed.to_le_bytes());
    hasher.update(fraction.to_bits().to_le_bytes());
    hasher.update((replicate as u64).to_le_bytes());
    let digest = hasher.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(first)
}

/// One train/test partition. Both halves keep the season's game order.
#[derive(Debug, Clone, PartialEq)]
pub struct Split<'a> {
    pub train: Vec<&'a Game>,
    pub test: Vec<&'a Game>,
    pub fraction: f64,
    pub replicate_index: usize,
    pub seed: u64,
}

/// Draw the split for a single `(fraction, replicate)` cell.
pub fn make_split(season: &Season, fraction: f64, replicate: usize, master_seed: u64) -> Result<Split<'_>, HarnessError> {
    let games = season.games();
    let n = games.len();
    let m = train_size(fraction, n);
    if !(fraction > 0.0 && fraction < 1.0) || m == 0 || m >= n {
        return Err(HarnessError::Config(format!(
            "fraction {fraction} of {n} games leaves an empty training or test set"
        )));
    }
    let seed = split_seed(master_seed, fraction, replicate);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_train = vec![false; n];
    for i in index::sample(&mut rng, n, m) {
        in_train[i] = true;
    }
    let (train, test): (Vec<_>, Vec<_>) = games.iter().zip(&in_train).partition(|(_, t)| **t);
    Ok(Split {
        train: train.into_iter().map(|(g, _)| g).collect(),
        test: test.into_iter().map(|(g, _)| g).collect(),
        fraction,
        replicate_index: replicate,
        seed,
    })
}

/// All `|x_grid| * replicates` splits, ordered by fraction then replicate.
pub fn make_splits<'a>(season: &'a Season, config: &ProtocolConfig) -> Result<Vec<Split<'a>>, HarnessError> {
    config.validate_for(season)?;
    let mut out = Vec::with_capacity(config.x_grid.len() * config.replicates);
    for &f in &config.x_grid {
        for k in 0..config.replicates {
            out.push(make_split(season, f, k, config.master_seed)?);
        }
    }
    Ok(out)
}

/// Accuracy of always picking the home team, ties earning half credit.
pub fn home_baseline<G: Borrow<Game>>(test: &[G]) -> Result<f64, MetricError> {
    if test.is_empty() {
        return Err(MetricError::Empty);
    }
    let credit: f64 = test.iter().map(|g| prediction_credit(true, g.borrow().outcome())).sum();
    Ok(credit / test.len() as f64)
}

/// Scores of one replicate. A model whose fit failed carries the error.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateResult {
    pub fraction: f64,
    pub replicate_index: usize,
    pub bt_acc: Result<f64, FitError>,
    pub mov_acc: Result<f64, FitError>,
    pub baseline_acc: f64,
}

pub fn evaluate_split(season: &Season, split: &Split<'_>, config: &ProtocolConfig) -> Result<ReplicateResult, HarnessError> {
    let teams = season.teams();
    let outcomes: Vec<Outcome> = split.test.iter().map(|g| g.outcome()).collect();

    let bt_acc = match fit_bt(&split.train, teams, config.bt_penalty, config.bt_tolerance, config.bt_max_iter) {
        Ok(fit) => {
            let preds: Vec<(bool, Outcome)> = split
                .test
                .iter()
                .zip(&outcomes)
                .map(|(g, &o)| (bt_predicts_home_win(fit.predict(g)), o))
                .collect();
            Ok(models::info_metric(&preds)?)
        }
        Err(e) => Err(e),
    };
    let mov_acc = match fit_mov(&split.train, teams, config.mov_penalty) {
        Ok(fit) => {
            let preds: Vec<(bool, Outcome)> = split
                .test
                .iter()
                .zip(&outcomes)
                .map(|(g, &o)| (mov_predicts_home_win(fit.predict(g)), o))
                .collect();
            Ok(models::info_metric(&preds)?)
        }
        Err(e) => Err(e),
    };
    Ok(ReplicateResult {
        fraction: split.fraction,
        replicate_index: split.replicate_index,
        bt_acc,
        mov_acc,
        baseline_acc: home_baseline(&split.test)?,
    })
}

/// Averaged scores at one training fraction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub fraction: f64,
    pub games_per_team: f64,
    pub replicates: usize,
    pub mean_bt_acc: f64,
    pub sd_bt_acc: f64,
    pub mean_mov_acc: f64,
    pub sd_mov_acc: f64,
    pub baseline_acc: f64,
    pub sd_baseline_acc: f64,
    pub bt_failures: usize,
    pub mov_failures: usize,
}

impl CurvePoint {
    /// Monte Carlo standard error of `mean_bt_acc` across replicates.
    pub fn se_bt(&self) -> f64 {
        self.sd_bt_acc / ((self.replicates - self.bt_failures) as f64).sqrt()
    }

    pub fn se_mov(&self) -> f64 {
        self.sd_mov_acc / ((self.replicates - self.mov_failures) as f64).sqrt()
    }

    pub fn se_baseline(&self) -> f64 {
        self.sd_baseline_acc / (self.replicates as f64).sqrt()
    }
}

/// Mean and sample standard deviation, summed in slice order.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

fn summarize_model(
    fraction: f64,
    model: &'static str,
    results: &[ReplicateResult],
    pick: impl Fn(&ReplicateResult) -> &Result<f64, FitError>,
) -> Result<(f64, f64, usize), HarnessError> {
    let mut ok = Vec::with_capacity(results.len());
    let mut last_error = None;
    for r in results {
        match pick(r) {
            Ok(v) => ok.push(*v),
            Err(e) => last_error = Some(e.clone()),
        }
    }
    let failures = results.len() - ok.len();
    if ok.is_empty() {
        return Err(HarnessError::AllReplicatesFailed {
            fraction,
            model,
            failures,
            last_error: last_error.expect("at least one replicate ran"),
        });
    }
    let (mean, sd) = mean_sd(&ok);
    Ok((mean, sd, failures))
}

/// Run the full protocol on the current rayon pool.
pub fn run_protocol(season: &Season, config: &ProtocolConfig) -> Result<Vec<CurvePoint>, HarnessError> {
    config.validate_for(season)?;
    let cells: Vec<(usize, usize)> = (0..config.x_grid.len())
        .flat_map(|fi| (0..config.replicates).map(move |k| (fi, k)))
        .collect();
    let results: Vec<ReplicateResult> = cells
        .par_iter()
        .map(|&(fi, k)| {
            let split = make_split(season, config.x_grid[fi], k, config.master_seed)?;
            evaluate_split(season, &split, config)
        })
        .collect::<Result<_, _>>()?;
    reduce(season, config, &results)
}

/// Run the protocol with exactly `jobs` worker threads. Output does not depend on `jobs`.
pub fn run_protocol_jobs(season: &Season, config: &ProtocolConfig, jobs: usize) -> Result<Vec<CurvePoint>, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_protocol(season, config))
}

fn reduce(season: &Season, config: &ProtocolConfig, results: &[ReplicateResult]) -> Result<Vec<CurvePoint>, HarnessError> {
    let k = config.replicates;
    config
        .x_grid
        .iter()
        .enumerate()
        .map(|(fi, &fraction)| {
            let block = &results[fi * k..(fi + 1) * k];
            let (mean_bt_acc, sd_bt_acc, bt_failures) = summarize_model(fraction, "BT", block, |r| &r.bt_acc)?;
            let (mean_mov_acc, sd_mov_acc, mov_failures) = summarize_model(fraction, "MOV", block, |r| &r.mov_acc)?;
            let baselines: Vec<f64> = block.iter().map(|r| r.baseline_acc).collect();
            let (baseline_acc, sd_baseline_acc) = mean_sd(&baselines);
            Ok(CurvePoint {
                fraction,
                games_per_team: fraction * season.games_per_team(),
                replicates: k,
                mean_bt_acc,
                sd_bt_acc,
                mean_mov_acc,
                sd_mov_acc,
                baseline_acc,
                sd_baseline_acc,
                bt_failures,
                mov_failures,
            })
        })
        .collect()
}
