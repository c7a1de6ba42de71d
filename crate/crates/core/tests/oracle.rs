mod common;

use std::time::Instant;

use drawctl::drawsim::EnvironmentConfig;
use drawctl::neural::Regressor;
use drawctl::observer::ObservabilityMode;
use drawctl::oracle::{baseline_trajectory, decode_trajectory, enumerate_rewards, OracleSummary};
use drawctl::qlearn::{evaluate_greedy, EvalConfig, FirstStep, QEnsemble};
use drawctl::rng::rng_substream;
use drawctl::Result;

use common::{beta_bin_masses, default_calibration};

/// Oracle values recomputed by direct rollouts of every trajectory with
/// quadrature bin masses.
struct Direct {
    rewards: Vec<Vec<f64>>,
    masses: Vec<f64>,
}

fn direct(cfg: &EnvironmentConfig) -> Direct {
    let cal = default_calibration(cfg);
    let rows = cfg.action_count().pow(cfg.horizon as u32);
    let rewards = (0..rows)
        .map(|r| {
            let traj = decode_trajectory(r, cfg.action_count(), cfg.horizon);
            (0..cfg.friction.bins).map(|b| cfg.trajectory_reward(&cal, &traj, b).unwrap()).collect()
        })
        .collect();
    Direct {
        rewards,
        masses: beta_bin_masses(cfg.friction.alpha, cfg.friction.beta, cfg.friction.bins),
    }
}

impl Direct {
    fn expected(&self, row: usize) -> f64 {
        self.rewards[row].iter().zip(&self.masses).map(|(r, p)| r * p).sum()
    }

    fn v_blind(&self) -> f64 {
        (0..self.rewards.len()).map(|r| self.expected(r)).fold(f64::NEG_INFINITY, f64::max)
    }

    fn v_full(&self) -> f64 {
        (0..self.masses.len())
            .map(|b| self.masses[b] * self.rewards.iter().map(|row| row[b]).fold(f64::NEG_INFINITY, f64::max))
            .sum()
    }
}

#[test]
fn enumeration_is_complete_and_fast() {
    let cfg = EnvironmentConfig::default();
    let cal = default_calibration(&cfg);
    let start = Instant::now();
    let m = enumerate_rewards(&cfg, &cal).unwrap();
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert_eq!((m.rows(), m.cols()), (16807, 10));
}

#[test]
fn summary_matches_direct_recomputation() {
    let cfg = EnvironmentConfig::default();
    let m = enumerate_rewards(&cfg, &default_calibration(&cfg)).unwrap();
    let s = OracleSummary::compute(&m, &cfg.friction.masses().unwrap(), 1).unwrap();
    let d = direct(&cfg);
    for (r, row) in d.rewards.iter().enumerate().step_by(97) {
        assert_eq!(m.row(r), row.as_slice());
    }
    let nominal = m.row_of(&s.baseline_trajectory).unwrap();
    assert_eq!(s.baseline_trajectory, m.trajectory(m.column_argmax(1)));
    assert!((s.expected_baseline - d.expected(nominal)).abs() < 1e-9);
    assert!((s.v_blind - d.v_blind()).abs() < 1e-9);
    assert!((s.v_full - d.v_full()).abs() < 1e-9);
    assert!(s.expected_baseline <= s.v_blind && s.v_blind < s.v_full);

    let mut rng = rng_substream(8, "open-loop");
    for _ in 0..100 {
        assert!(d.expected(rng.index(m.rows())) <= s.v_blind + 1e-12);
    }
}

#[test]
fn nominal_friction_moves_the_baseline() {
    let cfg = EnvironmentConfig::default();
    let m = enumerate_rewards(&cfg, &default_calibration(&cfg)).unwrap();
    assert_ne!(baseline_trajectory(&m, 0).unwrap(), baseline_trajectory(&m, 9).unwrap());
}

/// Full-mode Q-function scoring 1 for the oracle-optimal action at the
/// friction read from the last state component and 0 otherwise.
#[derive(Clone)]
struct OracleQ {
    t: usize,
    dim: usize,
    optimal: Vec<Vec<usize>>,
    action_values: Vec<f64>,
}

impl Regressor for OracleQ {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        let m = x[x.len() - 2];
        let bin = (m * self.optimal.len() as f64).round() as usize - 1;
        let best = self.action_values[self.optimal[bin][self.t]];
        Ok(if (x[x.len() - 1] - best).abs() < 1e-12 { 1.0 } else { 0.0 })
    }
}

#[test]
fn greedy_on_oracle_trajectories_attains_v_full() {
    let cfg = EnvironmentConfig::default();
    let cal = default_calibration(&cfg);
    let m = enumerate_rewards(&cfg, &cal).unwrap();
    let optimal: Vec<Vec<usize>> = (0..cfg.friction.bins).map(|b| m.trajectory(m.column_argmax(b))).collect();
    let observer = cfg.observer(ObservabilityMode::Full).unwrap();
    let av = cfg.action_values();
    let q = |t| OracleQ {
        t,
        dim: observer.state_dim(t, cfg.horizon).unwrap() + 1,
        optimal: optimal.clone(),
        action_values: av.clone(),
    };
    let ensemble = QEnsemble {
        action_values: av.clone(),
        first: FirstStep::Model(q(0)),
        models: (1..cfg.horizon).map(q).collect(),
    };
    let ev = evaluate_greedy(&ensemble, &cfg, &cal, ObservabilityMode::Full, EvalConfig::default(), &rng_substream(1, "e"))
        .unwrap();
    let s = OracleSummary::compute(&m, &cfg.friction.masses().unwrap(), 1).unwrap();
    assert!((ev.expected - s.v_full).abs() < 1e-12);
    assert_eq!(ev.trajectories, optimal);
}
