//! `key=value` run configuration.
//!
//! One setting per line, `#` starts a comment, absent keys keep their
//! defaults and unknown keys are rejected. Recognised keys:
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `seed` | master seed of the run | 0 |
//! | `scenario` | `full`, `partial` or `blind` | partial |
//! | `episodes` | learning episodes | 2500 |
//! | `alpha`, `gamma` | learning rate, discount | 0.7, 1 |
//! | `epsilon`, `decay` | initial exploration rate and its decay | 0.3, 0.001 |
//! | `retrain_interval`, `warmup`, `folds` | retraining schedule, CV folds (0 = off) | 50, 50, 5 |
//! | `eval_rollouts`, `eval_noise` | greedy evaluation rollouts per friction bin, sensor noise during evaluation | 1, false |
//! | `noise` | sensor noise while learning | true |
//! | `horizon`, `forces`, `max_force` | plant horizon, comma-separated force set in kN, force scale | 5, 20..140, 140 |
//! | `calibration_samples`, `calibration_seed` | episodes and seed of the cost-term calibration | 100, 0 |
//! | `nominal_bin` | 1-based friction bin of the open-loop baseline | 2 |
//! | `l2`, `tolerance`, `relative_decrease`, `max_iterations`, `restarts`, `init_scale`, `lbfgs_memory` | network training | 1e-4, 1e-6, 1e-9, 500, 2, 1, 10 |
//! | `hidden_small`, `hidden_large` | hidden width for `Q_1` and for later steps | 10, 50 |
//! | `out` | output directory | `out` |
//! | `sweep_alphas`, `sweep_epsilons`, `sweep_seeds` | sweep grid and seeds per cell | 0.3,0.5,0.7,0.9 / 0.1,0.2,0.3,0.4 / 10 |

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::drawsim::EnvironmentConfig;
use crate::error::{Error, Result};
use crate::neural::TrainConfig;
use crate::observer::ObservabilityMode;
use crate::qlearn::{EvalConfig, LearnerConfig, NetworkFitter};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub scenario: ObservabilityMode,
    pub episodes: usize,
    pub learner: LearnerConfig,
    pub eval: EvalConfig,
    pub env: EnvironmentConfig,
    pub calibration_samples: usize,
    pub calibration_seed: u64,
    /// 0-based.
    pub nominal_bin: usize,
    pub fitter: NetworkFitter,
    pub out: PathBuf,
    pub sweep_alphas: Vec<f64>,
    pub sweep_epsilons: Vec<f64>,
    pub sweep_seeds: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            scenario: ObservabilityMode::Partial,
            episodes: 2500,
            learner: LearnerConfig::default(),
            eval: EvalConfig::default(),
            env: EnvironmentConfig::default(),
            calibration_samples: 100,
            calibration_seed: 0,
            nominal_bin: 1,
            fitter: NetworkFitter::default(),
            out: PathBuf::from("out"),
            sweep_alphas: vec![0.3, 0.5, 0.7, 0.9],
            sweep_epsilons: vec![0.1, 0.2, 0.3, 0.4],
            sweep_seeds: 10,
        }
    }
}

fn parse<T: FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("'{value}': {e}"))
}

fn parse_list(value: &str) -> std::result::Result<Vec<f64>, String> {
    value.split(',').map(|v| parse::<f64>(v.trim())).collect()
}

impl RunConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        match key.trim() {
            "seed" => self.seed = parse(v)?,
            "scenario" => self.scenario = v.parse().map_err(|e: Error| e.to_string())?,
            "episodes" => self.episodes = parse(v)?,
            "alpha" => self.learner.alpha = parse(v)?,
            "gamma" => self.learner.gamma = parse(v)?,
            "epsilon" => self.learner.epsilon0 = parse(v)?,
            "decay" => self.learner.decay = parse(v)?,
            "retrain_interval" => self.learner.retrain_interval = parse(v)?,
            "warmup" => self.learner.warmup = parse(v)?,
            "folds" => self.learner.folds = parse(v)?,
            "eval_rollouts" => self.eval.rollouts = parse(v)?,
            "eval_noise" => self.eval.noise = parse(v)?,
            "noise" => self.env.noise = parse(v)?,
            "horizon" => self.env.horizon = parse(v)?,
            "forces" => self.env.forces = parse_list(v)?,
            "max_force" => self.env.max_force = parse(v)?,
            "calibration_samples" => self.calibration_samples = parse(v)?,
            "calibration_seed" => self.calibration_seed = parse(v)?,
            "nominal_bin" => {
                let bin: usize = parse(v)?;
                self.nominal_bin = bin.checked_sub(1).ok_or("nominal_bin is 1-based")?;
            }
            "l2" => self.fitter.train.l2 = parse(v)?,
            "tolerance" => self.fitter.train.tolerance = parse(v)?,
            "relative_decrease" => self.fitter.train.relative_decrease = parse(v)?,
            "max_iterations" => self.fitter.train.max_iterations = parse(v)?,
            "restarts" => self.fitter.train.restarts = parse(v)?,
            "init_scale" => self.fitter.train.init_scale = parse(v)?,
            "lbfgs_memory" => self.fitter.train.memory = parse(v)?,
            "hidden_small" => self.fitter.small = parse(v)?,
            "hidden_large" => self.fitter.large = parse(v)?,
            "out" => self.out = PathBuf::from(v),
            "sweep_alphas" => self.sweep_alphas = parse_list(v)?,
            "sweep_epsilons" => self.sweep_epsilons = parse_list(v)?,
            "sweep_seeds" => self.sweep_seeds = parse(v)?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::ConfigLine { line: i + 1, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got '{line}'")))?;
            cfg.set(key, value).map_err(err)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.learner.validate()?;
        self.env.validate()?;
        self.fitter.train.validate()?;
        if self.episodes < self.learner.warmup {
            return Err(Error::Config(format!(
                "episodes ({}) must be at least warmup ({})",
                self.episodes, self.learner.warmup
            )));
        }
        if self.nominal_bin >= self.env.friction.bins {
            return Err(Error::Config(format!(
                "nominal_bin {} outside 1..={}",
                self.nominal_bin + 1,
                self.env.friction.bins
            )));
        }
        if self.fitter.small == 0 || self.fitter.large == 0 {
            return Err(Error::Config("hidden layers need at least one unit".into()));
        }
        if self.eval.rollouts == 0 {
            return Err(Error::Config("eval_rollouts must be positive".into()));
        }
        if self.sweep_alphas.is_empty() || self.sweep_epsilons.is_empty() || self.sweep_seeds == 0 {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        Ok(())
    }

    pub fn training(&self) -> &TrainConfig {
        &self.fitter.train
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path, e))?;
    let cfg = RunConfig::from_text(&text)?;
    cfg.validate()?;
    Ok(cfg)
}
