//! The `calibrate`, `oracle`, `train` and `evaluate` commands. Each reads
//! and writes files in the configured output directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::drawsim::{calibrate_extrema, Calibration};
use crate::error::{Error, Result};
use crate::oracle::{enumerate_rewards, OracleSummary};
use crate::qlearn::{evaluate_greedy, GreedyEvaluation};
use crate::rng::rng_substream;

use super::config::RunConfig;
use super::metrics::MetricsWriter;
use super::persist::SavedEnsemble;
use super::run::{run_stream, run_training, TrainOutcome};

pub const CALIBRATION_FILE: &str = "calibration.txt";
pub const ORACLE_FILE: &str = "oracle.csv";
pub const MATRIX_FILE: &str = "reward_matrix.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const ENSEMBLE_FILE: &str = "ensemble.txt";
pub const EVALUATION_FILE: &str = "evaluation.csv";

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Calibrates the cost-term extrema and writes them to the output directory.
pub fn cmd_calibrate(config: &RunConfig) -> Result<Calibration> {
    config.validate()?;
    let mut rng = rng_substream(config.calibration_seed, "calibration");
    let cal = calibrate_extrema(&config.env, config.calibration_samples, &mut rng)?;
    ensure_dir(&config.out)?;
    cal.save(config.out.join(CALIBRATION_FILE))?;
    Ok(cal)
}

/// Loads the calibration from the output directory, calibrating first if
/// there is none.
pub fn ensure_calibration(config: &RunConfig) -> Result<Calibration> {
    let path = config.out.join(CALIBRATION_FILE);
    if path.exists() {
        Calibration::load(path)
    } else {
        cmd_calibrate(config)
    }
}

/// Writes the oracle summary and, if asked, the full reward matrix.
pub fn cmd_oracle(config: &RunConfig, export_matrix: bool) -> Result<OracleSummary> {
    config.validate()?;
    let cal = ensure_calibration(config)?;
    let matrix = enumerate_rewards(&config.env, &cal)?;
    let summary = OracleSummary::compute(&matrix, &config.env.friction.masses()?, config.nominal_bin)?;
    summary.save(config.out.join(ORACLE_FILE))?;
    if export_matrix {
        write_file(&config.out.join(MATRIX_FILE), &matrix.to_csv())?;
    }
    Ok(summary)
}

#[derive(Clone, Debug)]
pub struct TrainSummary {
    pub outcome: TrainOutcome,
    pub metrics: PathBuf,
    pub ensemble: Option<PathBuf>,
}

/// Runs one learning experiment into `dir`: the metrics CSV and, once a
/// retraining has happened, the final ensemble.
pub fn train_into(config: &RunConfig, calibration: &Calibration, dir: &Path) -> Result<TrainSummary> {
    config.validate()?;
    ensure_dir(dir)?;
    let metrics = dir.join(METRICS_FILE);
    let mut writer = MetricsWriter::create(&metrics)?;
    let outcome = run_training(config, calibration, |row| writer.write(row))?;
    let ensemble = match &outcome.ensemble {
        Some(e) => {
            let path = dir.join(ENSEMBLE_FILE);
            SavedEnsemble {
                scenario: config.scenario,
                ensemble: e.clone(),
            }
            .save(&path)?;
            Some(path)
        }
        None => None,
    };
    Ok(TrainSummary {
        outcome,
        metrics,
        ensemble,
    })
}

pub fn cmd_train(config: &RunConfig) -> Result<TrainSummary> {
    config.validate()?;
    let cal = ensure_calibration(config)?;
    train_into(config, &cal, &config.out)
}

/// Evaluates the saved ensemble greedily at every friction bin and writes
/// the per-bin table.
pub fn cmd_evaluate(config: &RunConfig) -> Result<GreedyEvaluation> {
    config.validate()?;
    let cal = ensure_calibration(config)?;
    let saved = SavedEnsemble::load(config.out.join(ENSEMBLE_FILE))?;
    if saved.ensemble.horizon() != config.env.horizon || saved.ensemble.action_values != config.env.action_values() {
        return Err(Error::Contract("saved ensemble does not match the configured plant".into()));
    }
    let rng = run_stream(config).derive("final-evaluation");
    let evaluation = evaluate_greedy(&saved.ensemble, &config.env, &cal, saved.scenario, config.eval, &rng)?;
    let masses = config.env.friction.masses()?;
    let mut csv = String::from("bin,friction,mass,reward,trajectory\n");
    for (bin, (reward, traj)) in evaluation.per_bin.iter().zip(&evaluation.trajectories).enumerate() {
        let traj: Vec<String> = traj.iter().map(usize::to_string).collect();
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            bin + 1,
            config.env.friction.value(bin),
            masses[bin],
            reward,
            traj.join("-")
        );
    }
    write_file(&config.out.join(EVALUATION_FILE), &csv)?;
    Ok(evaluation)
}
