//! Grid sweeps over learning and exploration rates.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::derive_seed;

use super::commands::{ensure_calibration, ensure_dir, train_into};
use super::config::RunConfig;
use super::metrics::read_metrics;

pub const SWEEP_DIR: &str = "sweep";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const FAILURES_FILE: &str = "failures.txt";
pub const AGGREGATE_HEADER: &str = "alpha,epsilon,runs,failures,first_250,episodes_1250_1500,last_250";

/// Episode windows (0-based, half-open) for a run of `episodes` episodes.
pub fn windows(episodes: usize) -> [(usize, usize); 3] {
    [
        (0, 250.min(episodes)),
        (1250.min(episodes), 1500.min(episodes)),
        (episodes.saturating_sub(250), episodes),
    ]
}

/// Mean episode reward per window; NaN for windows the run does not reach.
pub fn window_means(rewards: &[f64]) -> [f64; 3] {
    windows(rewards.len()).map(|(a, b)| {
        if b > a {
            rewards[a..b].iter().sum::<f64>() / (b - a) as f64
        } else {
            f64::NAN
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub alpha: f64,
    pub epsilon: f64,
    pub runs: usize,
    pub failures: usize,
    /// Mean over successful runs of each run's window mean.
    pub windows: [f64; 3],
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub cells: Vec<CellSummary>,
    pub failures: Vec<(PathBuf, String)>,
    pub aggregate: PathBuf,
}

/// Seed of the `k`-th repetition; shared by every cell.
pub fn sweep_seed(master: u64, k: usize) -> u64 {
    derive_seed(master, &format!("sweep/seed{k}"))
}

pub fn run_dir(root: &Path, alpha: f64, epsilon: f64, k: usize) -> PathBuf {
    root.join(format!("alpha{alpha}_eps{epsilon}")).join(format!("seed{k}"))
}

pub fn aggregate_csv(cells: &[CellSummary]) -> String {
    let mut out = format!("{AGGREGATE_HEADER}\n");
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.alpha, c.epsilon, c.runs, c.failures, c.windows[0], c.windows[1], c.windows[2]
        );
    }
    out
}

fn summarise(alpha: f64, epsilon: f64, runs: &[Option<[f64; 3]>]) -> CellSummary {
    let ok: Vec<&[f64; 3]> = runs.iter().flatten().collect();
    let mut windows = [f64::NAN; 3];
    if !ok.is_empty() {
        for (w, slot) in windows.iter_mut().enumerate() {
            *slot = ok.iter().map(|r| r[w]).sum::<f64>() / ok.len() as f64;
        }
    }
    CellSummary {
        alpha,
        epsilon,
        runs: ok.len(),
        failures: runs.len() - ok.len(),
        windows,
    }
}

/// Rebuilds the cell summaries from the metrics files on disk.
pub fn aggregate_from_files(config: &RunConfig) -> Result<Vec<CellSummary>> {
    let root = config.out.join(SWEEP_DIR);
    let mut cells = Vec::new();
    for &alpha in &config.sweep_alphas {
        for &epsilon in &config.sweep_epsilons {
            let runs: Vec<Option<[f64; 3]>> = (0..config.sweep_seeds)
                .map(|k| {
                    let rows = read_metrics(run_dir(&root, alpha, epsilon, k).join(super::commands::METRICS_FILE)).ok()?;
                    (rows.len() == config.episodes)
                        .then(|| window_means(&rows.iter().map(|r| r.reward).collect::<Vec<_>>()))
                })
                .collect();
            cells.push(summarise(alpha, epsilon, &runs));
        }
    }
    Ok(cells)
}

/// One training run per (α, ε₀, repetition), run in parallel. Failing runs
/// are recorded and do not stop the others.
pub fn cmd_sweep(config: &RunConfig) -> Result<SweepReport> {
    config.validate()?;
    let calibration = ensure_calibration(config)?;
    let root = config.out.join(SWEEP_DIR);
    ensure_dir(&root)?;

    let mut jobs = Vec::new();
    for &alpha in &config.sweep_alphas {
        for &epsilon in &config.sweep_epsilons {
            for k in 0..config.sweep_seeds {
                jobs.push((alpha, epsilon, k));
            }
        }
    }
    let results: Vec<Result<[f64; 3]>> = jobs
        .par_iter()
        .map(|&(alpha, epsilon, k)| {
            let mut cfg = config.clone();
            cfg.learner.alpha = alpha;
            cfg.learner.epsilon0 = epsilon;
            cfg.seed = sweep_seed(config.seed, k);
            let dir = run_dir(&root, alpha, epsilon, k);
            let mut rewards = Vec::with_capacity(cfg.episodes);
            train_into(&cfg, &calibration, &dir)?;
            for row in read_metrics(dir.join(super::commands::METRICS_FILE))? {
                rewards.push(row.reward);
            }
            Ok(window_means(&rewards))
        })
        .collect();

    let mut failures = Vec::new();
    let mut cells = Vec::new();
    let per_cell = config.sweep_seeds;
    for (chunk_jobs, chunk) in jobs.chunks(per_cell).zip(results.chunks(per_cell)) {
        let runs: Vec<Option<[f64; 3]>> = chunk_jobs
            .iter()
            .zip(chunk)
            .map(|(&(alpha, epsilon, k), r)| match r {
                Ok(w) => Some(*w),
                Err(e) => {
                    failures.push((run_dir(&root, alpha, epsilon, k), e.to_string()));
                    None
                }
            })
            .collect();
        cells.push(summarise(chunk_jobs[0].0, chunk_jobs[0].1, &runs));
    }

    let aggregate = root.join(AGGREGATE_FILE);
    std::fs::write(&aggregate, aggregate_csv(&cells)).map_err(|e| Error::io(&aggregate, e))?;
    let mut listing = String::new();
    for (dir, msg) in &failures {
        let _ = writeln!(listing, "{}: {msg}", dir.display());
    }
    let failures_path = root.join(FAILURES_FILE);
    std::fs::write(&failures_path, listing).map_err(|e| Error::io(&failures_path, e))?;
    Ok(SweepReport {
        cells,
        failures,
        aggregate,
    })
}
