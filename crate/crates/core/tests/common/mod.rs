#![allow(dead_code)]

use drawctl::drawsim::{calibrate_extrema, Calibration, EnvironmentConfig, FrictionDistribution};
use drawctl::mdp::{Episode, ReplayMemory, Transition};
use drawctl::neural::Regressor;
use drawctl::rng::rng_substream;
use drawctl::Result;

/// Calibration used by the command line defaults.
pub fn default_calibration(cfg: &EnvironmentConfig) -> Calibration {
    calibrate_extrema(cfg, 100, &mut rng_substream(0, "calibration")).unwrap()
}

/// Three steps, three forces, two friction bins, no sensor noise.
pub fn toy_config() -> EnvironmentConfig {
    EnvironmentConfig {
        horizon: 3,
        forces: vec![40.0, 90.0, 140.0],
        friction: FrictionDistribution {
            bins: 2,
            ..Default::default()
        },
        noise: false,
        ..Default::default()
    }
}

/// Regressor with a fixed output, or echoing its last input times `value`.
#[derive(Clone, Debug)]
pub struct Fixed {
    pub dim: usize,
    pub value: f64,
    pub echo: bool,
}

impl Regressor for Fixed {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(if self.echo { self.value * x[x.len() - 1] } else { self.value })
    }
}

pub fn transition(step: usize, state: Vec<f64>, action: usize, next: Vec<f64>, reward: f64) -> Transition {
    Transition {
        step,
        state,
        action_index: action,
        next_state: next,
        reward,
    }
}

pub fn memory_of(horizon: usize, episodes: Vec<Vec<Transition>>) -> ReplayMemory {
    let mut m = ReplayMemory::new(horizon);
    for transitions in episodes {
        let terminal_reward = transitions.last().unwrap().reward;
        m.push_episode(&Episode {
            transitions,
            terminal_reward,
            condition: 0.5,
        })
        .unwrap();
    }
    m
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Adaptive Simpson quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 60)
}

/// Beta(alpha, beta) probability of each of `bins` equal-width intervals
/// of [0, 1], normalised by quadrature of the unnormalised density. The
/// substitution `u = x^alpha` keeps the integrand bounded near 0; `beta`
/// must be at least 1.
pub fn beta_bin_masses(alpha: f64, beta: f64, bins: usize) -> Vec<f64> {
    let integrand = |u: f64| (1.0 - u.powf(1.0 / alpha)).max(0.0).powf(beta - 1.0) / alpha;
    let edge = |k: usize| (k as f64 / bins as f64).powf(alpha);
    let raw: Vec<f64> = (0..bins).map(|k| integrate(&integrand, edge(k), edge(k + 1), 1e-15)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|r| r / total).collect()
}
