//! Surrogate deep-drawing plant.
//!
//! A blank is drawn in `horizon` steps; before each step the controller picks a
//! blank holder force. The friction coefficient is drawn once per episode from
//! a binned Beta distribution and is never shown to the agent directly. Three
//! latent quantities evolve under closed-form dynamics:
//!
//! - `stress`: accumulated stress proxy. High force tears, low force wrinkles.
//! - `thickness`: wall-thickness proxy, thinned by force and friction.
//! - `drawin`: cumulative material draw-in, reduced by force and friction.
//!
//! At the end the three terms are turned into one reward by min/max scaling
//! against an empirical calibration and a weighted harmonic mean.

use std::fmt::Write as _;
use std::path::Path;

use rand_distr::{Distribution, Normal};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::mdp::{Environment, EnvironmentContract, StepOutcome};
use crate::observer::{ObservabilityMode, Observer};
use crate::rng::RngStream;

/// Per-episode friction: Beta(alpha, beta) on `[0, scale]`, discretised into
/// `bins` equal-width bins represented by their right edges.
#[derive(Clone, Debug, PartialEq)]
pub struct FrictionDistribution {
    pub alpha: f64,
    pub beta: f64,
    pub scale: f64,
    pub bins: usize,
}

impl Default for FrictionDistribution {
    fn default() -> Self {
        Self {
            alpha: 1.75,
            beta: 5.0,
            scale: 0.14,
            bins: 10,
        }
    }
}

impl FrictionDistribution {
    /// Probability mass of each bin, `p_k = F(k/bins) - F((k-1)/bins)`.
    pub fn masses(&self) -> Result<Vec<f64>> {
        if self.bins == 0 {
            return Err(Error::Config("friction distribution needs at least one bin".into()));
        }
        let dist = Beta::new(self.alpha, self.beta)
            .map_err(|e| Error::Config(format!("friction distribution: {e}")))?;
        let n = self.bins as f64;
        Ok((0..self.bins)
            .map(|k| dist.cdf((k + 1) as f64 / n) - dist.cdf(k as f64 / n))
            .collect())
    }

    /// Friction coefficient of bin `k` (0-based).
    pub fn value(&self, bin: usize) -> f64 {
        self.scale * self.normalized(bin)
    }

    /// Friction of bin `k` divided by `scale`, in `(0, 1]`.
    pub fn normalized(&self, bin: usize) -> f64 {
        (bin + 1) as f64 / self.bins as f64
    }

    pub fn mode_bin(&self) -> Result<usize> {
        let masses = self.masses()?;
        Ok(argmax(&masses))
    }

    pub fn sample_bin(&self, masses: &[f64], rng: &mut RngStream) -> usize {
        let u = rng.uniform();
        let mut acc = 0.0;
        for (k, p) in masses.iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        masses.len() - 1
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Latent plant state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatentState {
    pub stress: f64,
    pub thickness: f64,
    pub drawin: f64,
    pub t: usize,
}

impl Default for LatentState {
    fn default() -> Self {
        Self {
            stress: 0.0,
            thickness: 1.0,
            drawin: 0.0,
            t: 0,
        }
    }
}

/// Constants of the latent transition.
#[derive(Clone, Debug, PartialEq)]
pub struct Dynamics {
    /// Stress from force and from under-clamped wrinkling.
    pub stress: (f64, f64),
    /// Thinning rate and its friction offset.
    pub thinning: (f64, f64),
    /// Draw-in rate and its force and friction sensitivities.
    pub drawin: (f64, f64, f64),
}

impl Default for Dynamics {
    fn default() -> Self {
        Self {
            stress: (1.0, 1.5),
            thinning: (0.04, 0.5),
            drawin: (0.2, 0.5, 0.4),
        }
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Range(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

impl Dynamics {
    /// One control step with normalised force `f = u / u_max` and normalised
    /// friction `m = mu / scale`.
    pub fn step(&self, s: &LatentState, f: f64, m: f64) -> Result<LatentState> {
        check_unit("normalised force", f)?;
        check_unit("normalised friction", m)?;
        let (k0, k1) = self.stress;
        let (th0, th1) = self.thinning;
        let (d0, d1, d2) = self.drawin;
        Ok(LatentState {
            stress: s.stress + k0 * f * (1.0 + m) + k1 * (1.0 - f).powi(2) * (2.0 - m),
            thickness: s.thickness - th0 * f * (th1 + m),
            drawin: s.drawin + d0 * (1.0 - d1 * f) * (1.0 - d2 * m),
            t: s.t + 1,
        })
    }
}

/// Sensor model: stamp force, blank infeed and blank-holder offset.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableModel {
    /// Peak stamp force scale.
    pub stamp_peak: f64,
    /// Blank-holder offset scale and its friction sensitivity.
    pub offset: (f64, f64),
    /// Nominal `(low, high)` per channel; noise stds are fractions of the width.
    pub ranges: [(f64, f64); 3],
    pub noise_fraction: [f64; 3],
}

impl Default for ObservableModel {
    fn default() -> Self {
        Self {
            stamp_peak: 50.0,
            offset: (0.05, 0.2),
            ranges: [(0.0, 90.0), (0.0, 1.0), (0.0, 0.06)],
            noise_fraction: [0.01, 0.005, 0.01],
        }
    }
}

const STAMP_FRICTION_GAIN: f64 = 0.8;
const STAMP_FORCE_GAIN: f64 = 0.5;

impl ObservableModel {
    pub fn noise_std(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.noise_fraction[i] * (self.ranges[i].1 - self.ranges[i].0))
    }

    /// Observables after the step taken at control step `t` (0-based) into
    /// `after`. Gaussian noise is added when `noise` is given.
    pub fn observe(
        &self,
        after: &LatentState,
        f: f64,
        m: f64,
        t: usize,
        horizon: usize,
        noise: Option<&mut RngStream>,
    ) -> [f64; 3] {
        let progress = (t + 1) as f64 / horizon as f64;
        let mut obs = [
            self.stamp_peak
                * progress
                * (1.0 + STAMP_FRICTION_GAIN * m)
                * (1.0 - STAMP_FORCE_GAIN + STAMP_FORCE_GAIN * f),
            after.drawin,
            self.offset.0 * f * (1.0 + self.offset.1 * m),
        ];
        if let Some(rng) = noise {
            for (o, std) in obs.iter_mut().zip(self.noise_std()) {
                let normal = Normal::new(0.0, std).expect("finite std");
                *o += normal.sample(rng);
            }
        }
        obs
    }
}

/// Everything that defines the surrogate plant.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentConfig {
    pub horizon: usize,
    /// Selectable blank holder forces in kN.
    pub forces: Vec<f64>,
    pub max_force: f64,
    pub dynamics: Dynamics,
    pub observables: ObservableModel,
    pub friction: FrictionDistribution,
    pub noise: bool,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        Self {
            horizon: 5,
            forces: (1..=7).map(|k| 20.0 * k as f64).collect(),
            max_force: 140.0,
            dynamics: Dynamics::default(),
            observables: ObservableModel::default(),
            friction: FrictionDistribution::default(),
            noise: true,
        }
    }
}

impl EnvironmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be positive".into()));
        }
        if self.forces.is_empty() {
            return Err(Error::Config("action set is empty".into()));
        }
        if !(self.max_force > 0.0) || self.forces.iter().any(|u| !(*u > 0.0 && *u <= self.max_force)) {
            return Err(Error::Config(format!(
                "forces {:?} must lie in (0, {}]",
                self.forces, self.max_force
            )));
        }
        if self.friction.bins == 0 {
            return Err(Error::Config("friction needs at least one bin".into()));
        }
        Ok(())
    }

    pub fn action_count(&self) -> usize {
        self.forces.len()
    }

    /// Normalised forces `u / u_max`, indexed by action.
    pub fn action_values(&self) -> Vec<f64> {
        self.forces.iter().map(|u| u / self.max_force).collect()
    }

    pub fn contract(&self) -> EnvironmentContract {
        EnvironmentContract {
            horizon: self.horizon,
            action_count: self.forces.len(),
            observation_dim: 3,
        }
    }

    /// Observer scaling actions by `u_max` and observables by their nominal ranges.
    pub fn observer(&self, mode: ObservabilityMode) -> Result<Observer> {
        Observer::new(mode, self.action_values(), self.observables.ranges.to_vec())
    }

    /// Noise-free latent trajectory end point.
    pub fn rollout_latent(&self, actions: &[usize], bin: usize) -> Result<LatentState> {
        let m = self.friction.normalized(bin);
        let values = self.action_values();
        let mut s = LatentState::default();
        for &a in actions {
            let f = *values
                .get(a)
                .ok_or_else(|| Error::Range(format!("action {a} outside 0..{}", values.len())))?;
            s = self.dynamics.step(&s, f, m)?;
        }
        Ok(s)
    }

    /// Noise-free terminal reward of an open-loop trajectory at a friction bin.
    pub fn trajectory_reward(&self, calibration: &Calibration, actions: &[usize], bin: usize) -> Result<f64> {
        if actions.len() != self.horizon {
            return Err(Error::Contract(format!(
                "trajectory of length {} for horizon {}",
                actions.len(),
                self.horizon
            )));
        }
        let s = self.rollout_latent(actions, bin)?;
        calibration.reward(&terminal_costs(&s, self.horizon)?)
    }
}

/// Cost terms `(C_a, C_b, C_c)` of a terminal state: stress, negative
/// thickness and draw-in. Lower is better for each.
pub fn terminal_costs(state: &LatentState, horizon: usize) -> Result<[f64; 3]> {
    if state.t != horizon {
        return Err(Error::State(format!(
            "cost terms need a terminal state, got step {} of {horizon}",
            state.t
        )));
    }
    Ok([state.stress, -state.thickness, state.drawin])
}

/// Maps a cost onto `10` at the calibrated minimum and `0` at the maximum.
pub fn scale_term(cost: f64, min: f64, max: f64) -> Result<f64> {
    if !(max > min) {
        return Err(Error::Calibration(format!("degenerate extrema [{min}, {max}]")));
    }
    Ok(10.0 * (1.0 - (cost - min) / (max - min)))
}

/// Weighted harmonic mean of the scaled terms, or `0` as soon as any term is
/// non-positive.
pub fn combine_reward(terms: &[f64], weights: &[f64]) -> Result<f64> {
    if terms.len() != weights.len() {
        return Err(Error::Shape {
            expected: weights.len(),
            got: terms.len(),
        });
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
        return Err(Error::Config(format!("harmonic-mean weight {w} is not positive")));
    }
    if terms.iter().any(|r| !(*r > 0.0)) {
        return Ok(0.0);
    }
    let num: f64 = weights.iter().sum();
    let den: f64 = terms.iter().zip(weights).map(|(r, w)| w / r).sum();
    Ok(num / den)
}

pub const TERM_NAMES: [&str; 3] = ["stress", "thinning", "drawin"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TermScale {
    pub min: f64,
    pub max: f64,
    pub weight: f64,
}

/// Empirical cost extrema and harmonic-mean weights for the three terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub terms: [TermScale; 3],
}

impl Calibration {
    pub fn new(terms: [TermScale; 3]) -> Result<Self> {
        for (name, t) in TERM_NAMES.iter().zip(&terms) {
            if !(t.max > t.min) {
                return Err(Error::Calibration(format!(
                    "term {name}: max {} must exceed min {}",
                    t.max, t.min
                )));
            }
            if !(t.weight > 0.0) {
                return Err(Error::Calibration(format!("term {name}: weight {} must be positive", t.weight)));
            }
        }
        Ok(Self { terms })
    }

    pub fn scaled_terms(&self, costs: &[f64; 3]) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for ((o, c), t) in out.iter_mut().zip(costs).zip(&self.terms) {
            *o = scale_term(*c, t.min, t.max)?;
        }
        Ok(out)
    }

    pub fn reward(&self, costs: &[f64; 3]) -> Result<f64> {
        let weights = self.terms.map(|t| t.weight);
        combine_reward(&self.scaled_terms(costs)?, &weights)
    }

    /// `name=min,max,weight` lines, one per term.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, t) in TERM_NAMES.iter().zip(&self.terms) {
            let _ = writeln!(out, "{name}={},{},{}", t.min, t.max, t.weight);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut found: [Option<TermScale>; 3] = [None; 3];
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| Error::ConfigLine { line: i + 1, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected name=min,max,weight, got '{line}'")))?;
            let slot = TERM_NAMES
                .iter()
                .position(|n| *n == key.trim())
                .ok_or_else(|| bad(format!("unknown cost term '{}'", key.trim())))?;
            let nums: Vec<f64> = value
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(format!("bad number in '{value}': {e}")))?;
            let [min, max, weight] = nums[..] else {
                return Err(bad(format!("expected three numbers, got {}", nums.len())));
            };
            found[slot] = Some(TermScale { min, max, weight });
        }
        let mut terms = [TermScale { min: 0.0, max: 0.0, weight: 0.0 }; 3];
        for (i, f) in found.iter().enumerate() {
            terms[i] = f.ok_or_else(|| Error::Calibration(format!("missing term {}", TERM_NAMES[i])))?;
        }
        Self::new(terms)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// Extrema of the cost terms over `n` noise-free episodes with uniformly
/// random force trajectories and sampled friction. Weights are all one.
pub fn calibrate_extrema(config: &EnvironmentConfig, n: usize, rng: &mut RngStream) -> Result<Calibration> {
    if n < 2 {
        return Err(Error::Calibration(format!("need at least 2 samples, got {n}")));
    }
    config.validate()?;
    let masses = config.friction.masses()?;
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for _ in 0..n {
        let bin = config.friction.sample_bin(&masses, rng);
        let actions: Vec<usize> = (0..config.horizon).map(|_| rng.index(config.action_count())).collect();
        let costs = terminal_costs(&config.rollout_latent(&actions, bin)?, config.horizon)?;
        for i in 0..3 {
            lo[i] = lo[i].min(costs[i]);
            hi[i] = hi[i].max(costs[i]);
        }
    }
    Calibration::new(std::array::from_fn(|i| TermScale {
        min: lo[i],
        max: hi[i],
        weight: 1.0,
    }))
}

/// The plant as an episodic environment.
pub struct DrawingProcess {
    config: EnvironmentConfig,
    calibration: Calibration,
    masses: Vec<f64>,
    action_values: Vec<f64>,
    friction_rng: RngStream,
    noise_rng: RngStream,
    pinned_bin: Option<usize>,
    bin: usize,
    latent: LatentState,
}

impl DrawingProcess {
    /// Builds the plant and resets it, drawing the first friction value.
    pub fn new(
        config: EnvironmentConfig,
        calibration: Calibration,
        friction_rng: RngStream,
        noise_rng: RngStream,
    ) -> Result<Self> {
        config.validate()?;
        let masses = config.friction.masses()?;
        let action_values = config.action_values();
        let mut env = Self {
            config,
            calibration,
            masses,
            action_values,
            friction_rng,
            noise_rng,
            pinned_bin: None,
            bin: 0,
            latent: LatentState::default(),
        };
        env.reset();
        Ok(env)
    }

    pub fn config(&self) -> &EnvironmentConfig {
        &self.config
    }

    /// Fixes the friction bin for all following resets (`None` samples again).
    pub fn pin_friction(&mut self, bin: Option<usize>) -> Result<()> {
        if let Some(b) = bin {
            if b >= self.config.friction.bins {
                return Err(Error::Range(format!("friction bin {b} outside 0..{}", self.config.friction.bins)));
            }
        }
        self.pinned_bin = bin;
        Ok(())
    }

    pub fn set_noise(&mut self, on: bool) {
        self.config.noise = on;
    }

    /// Starts a new episode: zeroed latent state and a fresh friction draw.
    pub fn reset(&mut self) {
        self.bin = match self.pinned_bin {
            Some(b) => b,
            None => self.config.friction.sample_bin(&self.masses, &mut self.friction_rng),
        };
        self.latent = LatentState::default();
    }

    pub fn friction_bin(&self) -> usize {
        self.bin
    }

    pub fn friction(&self) -> f64 {
        self.config.friction.value(self.bin)
    }

    pub fn latent(&self) -> &LatentState {
        &self.latent
    }
}

impl Environment for DrawingProcess {
    fn contract(&self) -> EnvironmentContract {
        self.config.contract()
    }

    fn step_index(&self) -> usize {
        self.latent.t
    }

    fn condition(&self) -> f64 {
        self.config.friction.normalized(self.bin)
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome> {
        let horizon = self.config.horizon;
        if self.latent.t >= horizon {
            return Err(Error::State("episode already terminated".into()));
        }
        let f = *self
            .action_values
            .get(action)
            .ok_or_else(|| Error::Contract(format!("action {action} outside 0..{}", self.action_values.len())))?;
        let m = self.config.friction.normalized(self.bin);
        let t = self.latent.t;
        self.latent = self.config.dynamics.step(&self.latent, f, m)?;
        let noise = self.config.noise.then_some(&mut self.noise_rng);
        let observation = self.config.observables.observe(&self.latent, f, m, t, horizon, noise).to_vec();
        let terminal = self.latent.t == horizon;
        let reward = if terminal {
            self.calibration.reward(&terminal_costs(&self.latent, horizon)?)?
        } else {
            0.0
        };
        Ok(StepOutcome {
            observation,
            reward,
            terminal,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_substream;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn masses_normalised_with_mode_at_second_bin() {
        let d = FrictionDistribution::default();
        let p = d.masses().unwrap();
        assert_eq!(p.len(), 10);
        assert!(close(p.iter().sum::<f64>(), 1.0, 1e-9));
        assert_eq!(d.mode_bin().unwrap(), 1);
        assert!(close(d.value(1), 0.028, 1e-15));
        assert!(close(d.value(9), 0.14, 1e-15));
    }

    #[test]
    fn step_reference_values() {
        let dyn_ = Dynamics::default();
        let s = dyn_.step(&LatentState::default(), 1.0, 1.0).unwrap();
        assert!(close(s.stress, 2.0, 1e-12));
        assert!(close(s.thickness, 0.94, 1e-12));
        assert!(close(s.drawin, 0.06, 1e-12));
        assert_eq!(s.t, 1);
        let s0 = dyn_.step(&LatentState::default(), 1.0, 0.0).unwrap();
        assert!(close(s0.stress, 1.0, 1e-12));
        assert!(matches!(dyn_.step(&s, 1.2, 0.5), Err(Error::Range(_))));
        assert!(matches!(dyn_.step(&s, 0.5, -0.1), Err(Error::Range(_))));
    }

    #[test]
    fn observe_reference_values() {
        let model = ObservableModel::default();
        let s = Dynamics::default().step(&LatentState::default(), 1.0, 1.0).unwrap();
        let o = model.observe(&s, 1.0, 1.0, 4, 5, None);
        assert!(close(o[0], 90.0, 1e-12));
        assert!(close(o[1], 0.06, 1e-12));
        assert!(close(o[2], 0.06, 1e-12));
        let std = model.noise_std();
        assert!(close(std[0], 0.9, 1e-12) && close(std[1], 0.005, 1e-12) && close(std[2], 0.0006, 1e-15));
    }

    #[test]
    fn observation_noise_has_configured_std() {
        let model = ObservableModel::default();
        let s = LatentState { t: 3, ..Default::default() };
        let mut rng = rng_substream(5, "noise");
        let clean = model.observe(&s, 0.5, 0.5, 2, 5, None);
        let n = 100_000;
        let mut sum = [0.0; 3];
        let mut sq = [0.0; 3];
        for _ in 0..n {
            let o = model.observe(&s, 0.5, 0.5, 2, 5, Some(&mut rng));
            for i in 0..3 {
                let d = o[i] - clean[i];
                sum[i] += d;
                sq[i] += d * d;
            }
        }
        for (i, target) in [0.9, 0.005, 0.0006].into_iter().enumerate() {
            let mean = sum[i] / n as f64;
            let std = (sq[i] / n as f64 - mean * mean).sqrt();
            assert!((std / target - 1.0).abs() < 0.05, "channel {i}: {std} vs {target}");
        }
    }

    #[test]
    fn costs_need_terminal_state() {
        let s = LatentState { stress: 2.0, thickness: 0.94, drawin: 0.06, t: 5 };
        assert_eq!(terminal_costs(&s, 5).unwrap(), [2.0, -0.94, 0.06]);
        assert!(matches!(terminal_costs(&LatentState { t: 4, ..s }, 5), Err(Error::State(_))));
    }

    #[test]
    fn scaling_endpoints() {
        assert!(close(scale_term(1.0, 1.0, 3.0).unwrap(), 10.0, 1e-12));
        assert!(close(scale_term(3.0, 1.0, 3.0).unwrap(), 0.0, 1e-12));
        assert!(close(scale_term(2.0, 1.0, 3.0).unwrap(), 5.0, 1e-12));
        assert!(close(scale_term(4.0, 1.0, 3.0).unwrap(), -5.0, 1e-12));
        assert!(matches!(scale_term(1.0, 2.0, 2.0), Err(Error::Calibration(_))));
    }

    #[test]
    fn harmonic_mean_cases() {
        let w = [1.0; 3];
        assert!(close(combine_reward(&[10.0, 10.0, 10.0], &w).unwrap(), 10.0, 1e-12));
        assert!(close(combine_reward(&[2.0, 4.0, 8.0], &w).unwrap(), 3.0 / 0.875, 1e-12));
        assert_eq!(combine_reward(&[-1.0, 5.0, 5.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(combine_reward(&[0.0, 5.0, 5.0], &w).unwrap(), 0.0);
        assert!(matches!(combine_reward(&[1.0, 1.0, 1.0], &[1.0, 0.0, 1.0]), Err(Error::Config(_))));
    }

    #[test]
    fn calibration_text_round_trip() {
        let cal = calibrate_extrema(&EnvironmentConfig::default(), 100, &mut rng_substream(1, "calibration")).unwrap();
        let again = Calibration::from_text(&cal.to_text()).unwrap();
        assert_eq!(cal, again);
        for t in &cal.terms {
            assert!(t.max > t.min);
            assert_eq!(t.weight, 1.0);
        }
    }

    #[test]
    fn calibration_text_errors_name_the_line() {
        let err = Calibration::from_text("stress=1,2,1\nbogus=1,2,1\n").unwrap_err();
        assert!(matches!(err, Error::ConfigLine { line: 2, .. }));
        let err = Calibration::from_text("stress=1,2\n").unwrap_err();
        assert!(matches!(err, Error::ConfigLine { line: 1, .. }));
        assert!(matches!(Calibration::from_text("stress=1,2,1\n"), Err(Error::Calibration(_))));
    }

    #[test]
    fn calibration_is_deterministic() {
        let cfg = EnvironmentConfig::default();
        let a = calibrate_extrema(&cfg, 100, &mut rng_substream(9, "calibration")).unwrap();
        let b = calibrate_extrema(&cfg, 100, &mut rng_substream(9, "calibration")).unwrap();
        assert_eq!(a, b);
        assert!(matches!(calibrate_extrema(&cfg, 1, &mut rng_substream(9, "c")), Err(Error::Calibration(_))));
    }

    #[test]
    fn pinned_process_matches_open_loop_reward() {
        let mut cfg = EnvironmentConfig::default();
        cfg.noise = false;
        let cal = calibrate_extrema(&cfg, 100, &mut rng_substream(3, "calibration")).unwrap();
        let mut env = DrawingProcess::new(cfg.clone(), cal.clone(), rng_substream(3, "f"), rng_substream(3, "n")).unwrap();
        env.pin_friction(Some(9)).unwrap();
        env.reset();
        let mut last = None;
        for _ in 0..5 {
            last = Some(env.step(6).unwrap());
        }
        let last = last.unwrap();
        assert!(last.terminal);
        let expected = cfg.trajectory_reward(&cal, &[6; 5], 9).unwrap();
        assert_eq!(last.reward, expected);
        assert!(matches!(env.step(0), Err(Error::State(_))));
    }
}
