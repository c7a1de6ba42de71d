//! Fitted Q-learning over a replay memory.
//!
//! One regressor `Q_t(x̄, u)` per control step takes the surrogate state with
//! the normalised action appended. Retraining walks the steps backwards so
//! that the target for step `t` uses the freshly fitted `Q_{t+1}`:
//!
//! `y = (1 - α) Q_t^prev(x̄, u) + α [R + γ max_u' Q_{t+1}(x̄', u')]`
//!
//! When the first surrogate state is the empty history, `Q_0` is a table over
//! first actions holding the empirical mean of `R + γ max_u1 Q_1(x̄_1, u1)`.

use ndarray::Array2;

use crate::drawsim::{Calibration, DrawingProcess, EnvironmentConfig};
use crate::error::{Error, Result};
use crate::mdp::{run_episode, Environment, Episode, Policy, ReplayMemory, Transition};
use crate::neural::{self, cross_validate_with, Dataset, Network, Regressor, TrainConfig};
use crate::observer::{ObservabilityMode, Observer};
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq)]
pub struct LearnerConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon0: f64,
    pub decay: f64,
    /// Episodes between retrainings.
    pub retrain_interval: usize,
    /// Purely random episodes before the first retraining.
    pub warmup: usize,
    /// Cross-validation folds per retraining; 0 disables cross-validation.
    pub folds: usize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            alpha: 0.7,
            gamma: 1.0,
            epsilon0: 0.3,
            decay: 1e-3,
            retrain_interval: 50,
            warmup: 50,
            folds: 5,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha = {} outside (0, 1]", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("gamma = {} outside [0, 1]", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.epsilon0) {
            return bad(format!("epsilon0 = {} outside [0, 1]", self.epsilon0));
        }
        if !(self.decay >= 0.0) {
            return bad(format!("decay = {} is negative", self.decay));
        }
        if self.retrain_interval == 0 {
            return bad("retrain interval must be positive".into());
        }
        if self.folds == 1 {
            return bad("cross-validation needs at least 2 folds (0 disables it)".into());
        }
        Ok(())
    }

    pub fn schedule(&self) -> ExplorationSchedule {
        ExplorationSchedule {
            epsilon0: self.epsilon0,
            decay: self.decay,
        }
    }

    /// Whether a retraining is due after `episodes` completed episodes.
    pub fn retrain_due(&self, episodes: usize) -> bool {
        episodes >= self.warmup.max(1) && (episodes - self.warmup.max(1)) % self.retrain_interval == 0
    }
}

/// `ε_i = ε_0 exp(-λ i)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExplorationSchedule {
    pub epsilon0: f64,
    pub decay: f64,
}

impl ExplorationSchedule {
    pub fn epsilon(&self, episode: usize) -> f64 {
        self.epsilon0 * (-self.decay * episode as f64).exp()
    }
}

/// Empirical `Q_0(φ, u_0)`; `None` marks first actions never tried.
#[derive(Clone, Debug, PartialEq)]
pub struct Q0Table {
    pub values: Vec<Option<f64>>,
}

impl Q0Table {
    pub fn greedy(&self) -> Result<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (u, v) in self.values.iter().enumerate() {
            if let Some(v) = v {
                if best.is_none_or(|(_, b)| *v > b) {
                    best = Some((u, *v));
                }
            }
        }
        best.map(|(u, _)| u)
            .ok_or_else(|| Error::Policy("no first action has been observed yet".into()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FirstStep<M> {
    /// The first state is the empty history.
    Table(Q0Table),
    /// The first state carries information (full observability).
    Model(M),
}

/// Per-step Q approximators for one retraining generation.
#[derive(Clone, Debug, PartialEq)]
pub struct QEnsemble<M> {
    pub action_values: Vec<f64>,
    pub first: FirstStep<M>,
    /// `models[t - 1]` approximates `Q_t` for `t = 1..T-1`.
    pub models: Vec<M>,
}

fn with_action(state: &[f64], action_value: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(state.len() + 1);
    v.extend_from_slice(state);
    v.push(action_value);
    v
}

fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

impl<M: Regressor> QEnsemble<M> {
    pub fn horizon(&self) -> usize {
        self.models.len() + 1
    }

    pub fn action_count(&self) -> usize {
        self.action_values.len()
    }

    /// The regressor for step `t`, if that step is not tabular.
    pub fn model(&self, t: usize) -> Option<&M> {
        match (t, &self.first) {
            (0, FirstStep::Model(m)) => Some(m),
            (0, FirstStep::Table(_)) => None,
            (t, _) => self.models.get(t - 1),
        }
    }

    /// Q-values of every action at step `t`; `None` for unseen first actions.
    pub fn q_values(&self, t: usize, state: &[f64]) -> Result<Vec<Option<f64>>> {
        if t >= self.horizon() {
            return Err(Error::Range(format!("step {t} outside 0..{}", self.horizon())));
        }
        if let (0, FirstStep::Table(table)) = (t, &self.first) {
            if !state.is_empty() {
                return Err(Error::Shape { expected: 0, got: state.len() });
            }
            return Ok(table.values.clone());
        }
        let model = self.model(t).expect("non-tabular step");
        let rows = batch_with_actions(std::slice::from_ref(&state.to_vec()), &self.action_values)?;
        Ok(model.predict_rows(&rows)?.into_iter().map(Some).collect())
    }

    /// Greedy action; ties go to the lowest index, unseen entries are skipped.
    pub fn greedy(&self, t: usize, state: &[f64]) -> Result<usize> {
        if let (0, FirstStep::Table(table)) = (t, &self.first) {
            if !state.is_empty() {
                return Err(Error::Shape { expected: 0, got: state.len() });
            }
            return table.greedy();
        }
        let q: Vec<f64> = self.q_values(t, state)?.into_iter().map(|v| v.unwrap_or(f64::NEG_INFINITY)).collect();
        Ok(argmax_lowest(&q))
    }
}

/// Rows `state ⧺ a` for every state and every action value, state-major.
fn batch_with_actions(states: &[Vec<f64>], action_values: &[f64]) -> Result<Array2<f64>> {
    let dim = states.first().map_or(0, Vec::len) + 1;
    let mut flat = Vec::with_capacity(states.len() * action_values.len() * dim);
    for s in states {
        if s.len() + 1 != dim {
            return Err(Error::Shape { expected: dim - 1, got: s.len() });
        }
        for a in action_values {
            flat.extend_from_slice(s);
            flat.push(*a);
        }
    }
    Ok(Array2::from_shape_vec((states.len() * action_values.len(), dim), flat).expect("checked shape"))
}

/// `max_u Q(x, u)` for each state.
fn max_over_actions<M: Regressor>(model: &M, states: &[Vec<f64>], action_values: &[f64]) -> Result<Vec<f64>> {
    if states.is_empty() {
        return Ok(Vec::new());
    }
    let q = model.predict_rows(&batch_with_actions(states, action_values)?)?;
    Ok(q.chunks(action_values.len())
        .map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect())
}

/// ε-greedy choice at step `t`. One uniform draw decides between exploring
/// and exploiting; exploring draws the action uniformly.
pub fn select_action<M: Regressor>(
    ensemble: &QEnsemble<M>,
    state: &[f64],
    t: usize,
    epsilon: f64,
    rng: &mut RngStream,
) -> Result<usize> {
    if rng.uniform() < epsilon {
        Ok(rng.index(ensemble.action_count()))
    } else {
        ensemble.greedy(t, state)
    }
}

/// Exploring policy for one episode. Without an ensemble it acts uniformly.
pub struct EpsilonGreedy<'a, M> {
    pub ensemble: Option<&'a QEnsemble<M>>,
    pub epsilon: f64,
    pub action_count: usize,
    pub rng: &'a mut RngStream,
}

impl<M: Regressor> Policy for EpsilonGreedy<'_, M> {
    fn act(&mut self, t: usize, state: &[f64]) -> Result<usize> {
        match self.ensemble {
            Some(ens) => select_action(ens, state, t, self.epsilon, self.rng),
            None => Ok(self.rng.index(self.action_count)),
        }
    }
}

/// Purely greedy policy, used for evaluation.
pub struct Greedy<'a, M>(pub &'a QEnsemble<M>);

impl<M: Regressor> Policy for Greedy<'_, M> {
    fn act(&mut self, t: usize, state: &[f64]) -> Result<usize> {
        self.0.greedy(t, state)
    }
}

/// Training set for `Q_t`: inputs `x̄ ⧺ u`, targets from the update rule.
/// `previous` is last generation's `Q_t` (absent on the first retraining,
/// which then uses `α = 1`); `next` is this generation's `Q_{t+1}`.
pub fn build_targets<M: Regressor>(
    memory: &ReplayMemory,
    t: usize,
    previous: Option<&M>,
    next: Option<&M>,
    alpha: f64,
    gamma: f64,
    action_values: &[f64],
) -> Result<Dataset> {
    let slice = memory.replay_slice(t)?;
    if slice.is_empty() {
        return Err(Error::Data(format!("no transitions for step {t}")));
    }
    let terminal = t + 1 == memory.horizon();
    let bootstrap = if terminal {
        vec![0.0; slice.len()]
    } else {
        let next = next.ok_or_else(|| Error::Contract(format!("targets for step {t} need Q_{}", t + 1)))?;
        let next_states: Vec<Vec<f64>> = slice.iter().map(|tr| tr.next_state.clone()).collect();
        max_over_actions(next, &next_states, action_values)?
    };
    let rows: Vec<Vec<f64>> = slice
        .iter()
        .map(|tr| Ok(with_action(&tr.state, action_value(action_values, tr)?)))
        .collect::<Result<_>>()?;
    let inputs = Dataset::from_rows(&rows, vec![0.0; rows.len()])?.inputs;
    let (alpha, prior) = match previous {
        Some(prev) => (alpha, prev.predict_rows(&inputs)?),
        None => (1.0, vec![0.0; slice.len()]),
    };
    let targets = slice
        .iter()
        .zip(bootstrap)
        .zip(prior)
        .map(|((tr, boot), q_prev)| (1.0 - alpha) * q_prev + alpha * (tr.reward + gamma * boot))
        .collect();
    Dataset::new(inputs, targets)
}

fn action_value(action_values: &[f64], tr: &Transition) -> Result<f64> {
    action_values
        .get(tr.action_index)
        .copied()
        .ok_or_else(|| Error::Range(format!("action {} outside 0..{}", tr.action_index, action_values.len())))
}

/// Empirical mean of `R + γ max_u1 Q_1(x̄_1, u1)` per first action.
pub fn fit_q0<M: Regressor>(
    memory: &ReplayMemory,
    q1: Option<&M>,
    gamma: f64,
    action_values: &[f64],
) -> Result<Q0Table> {
    let slice = memory.replay_slice(0)?;
    let bootstrap = if memory.horizon() == 1 {
        vec![0.0; slice.len()]
    } else {
        let q1 = q1.ok_or_else(|| Error::Contract("Q_0 needs Q_1".into()))?;
        let states: Vec<Vec<f64>> = slice.iter().map(|tr| tr.next_state.clone()).collect();
        max_over_actions(q1, &states, action_values)?
    };
    let mut sums = vec![(0.0, 0usize); action_values.len()];
    for (tr, boot) in slice.iter().zip(bootstrap) {
        let slot = sums
            .get_mut(tr.action_index)
            .ok_or_else(|| Error::Range(format!("action {} outside 0..{}", tr.action_index, action_values.len())))?;
        slot.0 += tr.reward + gamma * boot;
        slot.1 += 1;
    }
    Ok(Q0Table {
        values: sums.into_iter().map(|(s, n)| (n > 0).then(|| s / n as f64)).collect(),
    })
}

/// Produces the regressor for one control step.
pub trait QFitter {
    type Model: Regressor + Clone;

    fn fit(&self, t: usize, data: &Dataset, rng: &RngStream) -> Result<Self::Model>;

    fn cross_validate(&self, t: usize, data: &Dataset, folds: usize, rng: &RngStream) -> Result<f64> {
        cross_validate_with(data, folds, rng, |d, r| self.fit(t, d, r))
    }
}

/// Two-hidden-layer networks: `small` units per layer for `t <= 1`, `large`
/// for later steps, whose inputs are longer.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkFitter {
    pub small: usize,
    pub large: usize,
    pub train: TrainConfig,
}

impl Default for NetworkFitter {
    fn default() -> Self {
        Self {
            small: 10,
            large: 50,
            train: TrainConfig::default(),
        }
    }
}

impl NetworkFitter {
    pub fn sizes(&self, t: usize, input_dim: usize) -> [usize; 4] {
        let h = if t <= 1 { self.small } else { self.large };
        [input_dim, h, h, 1]
    }
}

impl QFitter for NetworkFitter {
    type Model = Network;

    fn fit(&self, t: usize, data: &Dataset, rng: &RngStream) -> Result<Network> {
        neural::train(&self.sizes(t, data.dim()), data, &self.train, rng)
    }
}

/// Outcome of one retraining.
#[derive(Clone, Debug, PartialEq)]
pub struct Retraining<M> {
    pub ensemble: QEnsemble<M>,
    /// Mean cross-validated R² of `Q_t`, index `t - 1`; NaN when unavailable.
    pub r2: Vec<f64>,
}

/// Refits every step from scratch on the whole memory, from `T-1` down to 0.
pub fn retrain<F: QFitter>(
    memory: &ReplayMemory,
    config: &LearnerConfig,
    fitter: &F,
    previous: Option<&QEnsemble<F::Model>>,
    action_values: &[f64],
    rng: &RngStream,
) -> Result<Retraining<F::Model>> {
    config.validate()?;
    let horizon = memory.horizon();
    if memory.is_empty() {
        return Err(Error::Data("cannot retrain on an empty replay memory".into()));
    }
    let mut fresh: Vec<Option<F::Model>> = vec![None; horizon];
    let mut r2 = vec![f64::NAN; horizon.saturating_sub(1)];

    let first_is_phi = memory.replay_slice(0)?[0].state.is_empty();
    let lowest_fitted = if first_is_phi { 1 } else { 0 };

    for t in (lowest_fitted..horizon).rev() {
        let prev = previous.and_then(|p| p.model(t));
        let next = fresh.get(t + 1).and_then(Option::as_ref);
        let data = build_targets(memory, t, prev, next, config.alpha, config.gamma, action_values)?;
        if t >= 1 && config.folds >= 2 && data.len() >= config.folds {
            r2[t - 1] = match fitter.cross_validate(t, &data, config.folds, &rng.derive(&format!("fold-shuffle/t{t}"))) {
                Ok(v) => v,
                // constant targets in a fold: R² is undefined
                Err(Error::Data(_)) => f64::NAN,
                Err(e) => return Err(e),
            };
        }
        fresh[t] = Some(fitter.fit(t, &data, &rng.derive(&format!("network-init/t{t}")))?);
    }

    let first = if first_is_phi {
        FirstStep::Table(fit_q0(memory, fresh.get(1).and_then(Option::as_ref), config.gamma, action_values)?)
    } else {
        FirstStep::Model(fresh[0].take().expect("fitted above"))
    };
    let models = fresh.into_iter().skip(1).map(|m| m.expect("fitted above")).collect();
    Ok(Retraining {
        ensemble: QEnsemble {
            action_values: action_values.to_vec(),
            first,
            models,
        },
        r2,
    })
}

/// Rollout settings for greedy evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalConfig {
    /// Rollouts per friction bin.
    pub rollouts: usize,
    pub noise: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            rollouts: 1,
            noise: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreedyEvaluation {
    /// Friction-weighted mean reward.
    pub expected: f64,
    pub per_bin: Vec<f64>,
    /// Actions of the first rollout at every bin.
    pub trajectories: Vec<Vec<usize>>,
}

/// Mean greedy reward at every pinned friction bin, weighted by the bin
/// masses. Does not touch any replay memory.
pub fn evaluate_greedy<M: Regressor>(
    ensemble: &QEnsemble<M>,
    env_config: &EnvironmentConfig,
    calibration: &Calibration,
    mode: ObservabilityMode,
    eval: EvalConfig,
    rng: &RngStream,
) -> Result<GreedyEvaluation> {
    if eval.rollouts == 0 {
        return Err(Error::Config("evaluation needs at least one rollout".into()));
    }
    let mut cfg = env_config.clone();
    cfg.noise = eval.noise;
    let observer = cfg.observer(mode)?;
    let masses = cfg.friction.masses()?;
    let mut env = DrawingProcess::new(cfg, calibration.clone(), rng.derive("friction"), rng.derive("noise"))?;
    let mut per_bin = Vec::with_capacity(masses.len());
    let mut trajectories = Vec::with_capacity(masses.len());
    for bin in 0..masses.len() {
        env.pin_friction(Some(bin))?;
        let mut total = 0.0;
        for r in 0..eval.rollouts {
            env.reset();
            let ep = run_episode(&mut env, &mut Greedy(ensemble), &observer)?;
            if r == 0 {
                trajectories.push(ep.actions());
            }
            total += ep.terminal_reward;
        }
        per_bin.push(total / eval.rollouts as f64);
    }
    Ok(GreedyEvaluation {
        expected: per_bin.iter().zip(&masses).map(|(r, p)| r * p).sum(),
        per_bin,
        trajectories,
    })
}

pub fn expected_greedy_reward<M: Regressor>(
    ensemble: &QEnsemble<M>,
    env_config: &EnvironmentConfig,
    calibration: &Calibration,
    mode: ObservabilityMode,
    eval: EvalConfig,
    rng: &RngStream,
) -> Result<f64> {
    Ok(evaluate_greedy(ensemble, env_config, calibration, mode, eval, rng)?.expected)
}

/// What happened in one learning episode.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport<M> {
    pub episode: Episode,
    pub epsilon: f64,
    /// Present when the episode completed a retraining.
    pub retraining: Option<Retraining<M>>,
}

/// The online loop: act ε-greedily, store the episode, retrain on schedule.
pub struct Learner<F: QFitter> {
    config: LearnerConfig,
    fitter: F,
    observer: Observer,
    memory: ReplayMemory,
    ensemble: Option<QEnsemble<F::Model>>,
    exploration: RngStream,
    training: RngStream,
    retrainings: usize,
}

impl<F: QFitter> Learner<F> {
    /// `rng` is the run's root stream; exploration and training derive from it.
    pub fn new(config: LearnerConfig, fitter: F, observer: Observer, horizon: usize, rng: &RngStream) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            fitter,
            observer,
            memory: ReplayMemory::new(horizon),
            ensemble: None,
            exploration: rng.derive("exploration"),
            training: rng.derive("training"),
            retrainings: 0,
        })
    }

    pub fn memory(&self) -> &ReplayMemory {
        &self.memory
    }

    pub fn ensemble(&self) -> Option<&QEnsemble<F::Model>> {
        self.ensemble.as_ref()
    }

    pub fn observer(&self) -> &Observer {
        &self.observer
    }

    pub fn retrainings(&self) -> usize {
        self.retrainings
    }

    /// Exploration rate of the next episode (1 during warm-up).
    pub fn next_epsilon(&self) -> f64 {
        let i = self.memory.episode_count();
        if i < self.config.warmup || self.ensemble.is_none() {
            1.0
        } else {
            self.config.schedule().epsilon(i)
        }
    }

    /// Runs one episode on a freshly reset environment and retrains if due.
    pub fn run_episode<E: Environment + ?Sized>(&mut self, env: &mut E) -> Result<StepReport<F::Model>> {
        let epsilon = self.next_epsilon();
        let action_count = self.observer.action_values().len();
        let episode = {
            let mut policy = EpsilonGreedy {
                ensemble: self.ensemble.as_ref(),
                epsilon,
                action_count,
                rng: &mut self.exploration,
            };
            run_episode(env, &mut policy, &self.observer)?
        };
        self.memory.push_episode(&episode)?;
        let retraining = if self.config.retrain_due(self.memory.episode_count()) {
            Some(self.retrain_now()?)
        } else {
            None
        };
        Ok(StepReport {
            episode,
            epsilon,
            retraining,
        })
    }

    pub fn retrain_now(&mut self) -> Result<Retraining<F::Model>> {
        let rng = self.training.derive(&format!("retrain{}", self.retrainings));
        let out = retrain(
            &self.memory,
            &self.config,
            &self.fitter,
            self.ensemble.as_ref(),
            self.observer.action_values(),
            &rng,
        )?;
        self.retrainings += 1;
        self.ensemble = Some(out.ensemble.clone());
        Ok(out)
    }
}

pub mod tabular {
    //! Exact lookup tables standing in for networks on enumerable instances.

    use std::collections::HashMap;

    use super::QFitter;
    use crate::error::{Error, Result};
    use crate::neural::{Dataset, Regressor};
    use crate::rng::RngStream;

    /// Mean target per exact input vector; unseen inputs predict `default`.
    #[derive(Clone, Debug, PartialEq)]
    pub struct TableModel {
        input_dim: usize,
        default: f64,
        entries: HashMap<Vec<u64>, f64>,
    }

    fn key(input: &[f64]) -> Vec<u64> {
        input.iter().map(|v| v.to_bits()).collect()
    }

    impl TableModel {
        pub fn len(&self) -> usize {
            self.entries.len()
        }

        pub fn is_empty(&self) -> bool {
            self.entries.is_empty()
        }
    }

    impl Regressor for TableModel {
        fn input_dim(&self) -> usize {
            self.input_dim
        }

        fn predict(&self, input: &[f64]) -> Result<f64> {
            if input.len() != self.input_dim {
                return Err(Error::Shape {
                    expected: self.input_dim,
                    got: input.len(),
                });
            }
            Ok(self.entries.get(&key(input)).copied().unwrap_or(self.default))
        }
    }

    #[derive(Clone, Copy, Debug, Default, PartialEq)]
    pub struct TableFitter {
        pub default: f64,
    }

    impl QFitter for TableFitter {
        type Model = TableModel;

        fn fit(&self, _t: usize, data: &Dataset, _rng: &RngStream) -> Result<TableModel> {
            let mut sums: HashMap<Vec<u64>, (f64, usize)> = HashMap::new();
            for (row, y) in data.inputs.rows().into_iter().zip(&data.targets) {
                let e = sums.entry(key(row.as_slice().expect("standard layout"))).or_insert((0.0, 0));
                e.0 += y;
                e.1 += 1;
            }
            Ok(TableModel {
                input_dim: data.dim(),
                default: self.default,
                entries: sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect(),
            })
        }
    }
}
