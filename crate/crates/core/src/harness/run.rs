//! The online learning loop behind `train` and `sweep`.

use crate::drawsim::{Calibration, DrawingProcess};
use crate::error::Result;
use crate::neural::Network;
use crate::qlearn::{evaluate_greedy, GreedyEvaluation, Learner, QEnsemble};
use crate::rng::{rng_substream, RngStream};

use super::config::RunConfig;
use super::metrics::{MetricsRow, R2_COLUMNS};

/// Expected greedy reward measured after one retraining.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub episode: usize,
    pub evaluation: GreedyEvaluation,
    pub r2: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub checkpoints: Vec<Checkpoint>,
    pub ensemble: Option<QEnsemble<Network>>,
    pub episodes: usize,
}

/// Root stream of one run.
pub fn run_stream(config: &RunConfig) -> RngStream {
    rng_substream(config.seed, "run")
}

/// Runs `config.episodes` learning episodes, retraining on schedule and
/// evaluating the greedy policy after every retraining. Every episode is
/// handed to `sink` as soon as it is complete.
pub fn run_training(
    config: &RunConfig,
    calibration: &Calibration,
    mut sink: impl FnMut(&MetricsRow) -> Result<()>,
) -> Result<TrainOutcome> {
    config.validate()?;
    let root = run_stream(config);
    let observer = config.env.observer(config.scenario)?;
    let mut learner = Learner::new(config.learner.clone(), config.fitter.clone(), observer, config.env.horizon, &root)?;
    let mut env = DrawingProcess::new(
        config.env.clone(),
        calibration.clone(),
        root.derive("friction"),
        root.derive("noise"),
    )?;
    let evaluation_rng = root.derive("evaluation");
    let mut checkpoints = Vec::new();

    for i in 0..config.episodes {
        env.reset();
        let friction = env.friction();
        let report = learner.run_episode(&mut env)?;
        let mut row = MetricsRow {
            episode: i + 1,
            epsilon: report.epsilon,
            reward: report.episode.terminal_reward,
            friction,
            expected_reward: None,
            r2: [None; R2_COLUMNS],
            scenario: config.scenario,
            seed: config.seed,
        };
        if let Some(retraining) = report.retraining {
            let rng = evaluation_rng.derive(&format!("retrain{}", checkpoints.len()));
            let evaluation = evaluate_greedy(
                &retraining.ensemble,
                &config.env,
                calibration,
                config.scenario,
                config.eval,
                &rng,
            )?;
            row.expected_reward = Some(evaluation.expected);
            for (cell, r2) in row.r2.iter_mut().zip(&retraining.r2) {
                *cell = r2.is_finite().then_some(*r2);
            }
            checkpoints.push(Checkpoint {
                episode: i + 1,
                evaluation,
                r2: retraining.r2,
            });
        }
        sink(&row)?;
    }
    Ok(TrainOutcome {
        checkpoints,
        ensemble: learner.ensemble().cloned(),
        episodes: config.episodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drawsim::calibrate_extrema;

    fn quick() -> RunConfig {
        let mut cfg = RunConfig::from_text("episodes=60\nwarmup=50\nretrain_interval=50\nfolds=0\nmax_iterations=20\nrestarts=1")
            .unwrap();
        cfg.fitter.small = 4;
        cfg.fitter.large = 4;
        cfg
    }

    #[test]
    fn one_retraining_after_warmup() {
        let cfg = quick();
        let cal = calibrate_extrema(&cfg.env, 100, &mut rng_substream(0, "calibration")).unwrap();
        let mut rows = Vec::new();
        let out = run_training(&cfg, &cal, |r| {
            rows.push(r.clone());
            Ok(())
        })
        .unwrap();
        assert_eq!(rows.len(), 60);
        assert_eq!(out.checkpoints.len(), 1);
        assert_eq!(out.checkpoints[0].episode, 50);
        let retrain_rows: Vec<_> = rows.iter().filter(|r| r.expected_reward.is_some()).collect();
        assert_eq!(retrain_rows.len(), 1);
        assert_eq!(retrain_rows[0].episode, 50);
        assert!(rows[..50].iter().all(|r| r.epsilon == 1.0));
        assert!((rows[50].epsilon - 0.3 * (-0.05f64).exp()).abs() < 1e-15);
        assert!(rows.iter().all(|r| r.r2 == [None; 4]));
    }
}
