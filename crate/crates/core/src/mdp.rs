//! Episodic fixed-horizon environment contract, episode runner and replay memory.
//!
//! Every episode terminates after exactly `horizon` actions and the only
//! reward is the terminal one, attached to the transition of the last step.

use crate::error::{Error, Result};
use crate::observer::{History, Observer};

/// Static shape of an episodic environment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnvironmentContract {
    pub horizon: usize,
    pub action_count: usize,
    pub observation_dim: usize,
}

impl EnvironmentContract {
    pub fn new(horizon: usize, action_count: usize, observation_dim: usize) -> Result<Self> {
        if horizon == 0 || action_count == 0 || observation_dim == 0 {
            return Err(Error::Contract(format!(
                "environment contract needs positive sizes, got T={horizon}, |U|={action_count}, dim(O)={observation_dim}"
            )));
        }
        Ok(Self {
            horizon,
            action_count,
            observation_dim,
        })
    }
}

/// What the environment reports after one control action.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub observation: Vec<f64>,
    /// Zero except on the final step.
    pub reward: f64,
    pub terminal: bool,
}

pub trait Environment {
    fn contract(&self) -> EnvironmentContract;

    /// Number of actions applied since the last reset.
    fn step_index(&self) -> usize;

    /// Hidden per-episode process condition in normalised units. Only the
    /// fully observable mode hands this to the agent.
    fn condition(&self) -> f64;

    fn step(&mut self, action: usize) -> Result<StepOutcome>;
}

/// Maps a surrogate state at step `t` to an action index.
pub trait Policy {
    fn act(&mut self, t: usize, state: &[f64]) -> Result<usize>;
}

impl<F> Policy for F
where
    F: FnMut(usize, &[f64]) -> Result<usize>,
{
    fn act(&mut self, t: usize, state: &[f64]) -> Result<usize> {
        self(t, state)
    }
}

/// One replay-memory entry `(x̄, u, x̄', R)` tagged with its control step.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub step: usize,
    pub state: Vec<f64>,
    pub action_index: usize,
    /// Empty on the final step, where only the terminal reward matters.
    pub next_state: Vec<f64>,
    pub reward: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    pub transitions: Vec<Transition>,
    pub terminal_reward: f64,
    /// The hidden condition the episode ran under.
    pub condition: f64,
}

impl Episode {
    pub fn total_reward(&self) -> f64 {
        self.transitions.iter().map(|t| t.reward).sum()
    }

    pub fn actions(&self) -> Vec<usize> {
        self.transitions.iter().map(|t| t.action_index).collect()
    }
}

/// Runs one episode from a freshly reset environment to the terminal state.
///
/// The observer starts from the empty history; states handed to the policy
/// and stored in the transitions are its encodings.
pub fn run_episode<E, P>(env: &mut E, policy: &mut P, observer: &Observer) -> Result<Episode>
where
    E: Environment + ?Sized,
    P: Policy + ?Sized,
{
    let contract = env.contract();
    if env.step_index() != 0 {
        return Err(Error::State(format!(
            "episode must start from a reset environment, found step {}",
            env.step_index()
        )));
    }
    let condition = env.condition();
    let mut history = History::default();
    let mut state = observer.encode(&history, condition)?;
    let mut transitions = Vec::with_capacity(contract.horizon);
    let mut terminal_reward = 0.0;

    for t in 0..contract.horizon {
        let action = policy.act(t, &state)?;
        if action >= contract.action_count {
            return Err(Error::Contract(format!(
                "policy chose action {action} at step {t}, only {} actions exist",
                contract.action_count
            )));
        }
        let outcome = env.step(action)?;
        let last = t + 1 == contract.horizon;
        if outcome.terminal != last {
            return Err(Error::Contract(format!(
                "environment signalled terminal={} at step {t} of {}",
                outcome.terminal, contract.horizon
            )));
        }
        history.push(action, outcome.observation);
        let (next_state, reward) = if last {
            terminal_reward = outcome.reward;
            (Vec::new(), outcome.reward)
        } else {
            (observer.encode(&history, condition)?, 0.0)
        };
        transitions.push(Transition {
            step: t,
            state: std::mem::replace(&mut state, next_state.clone()),
            action_index: action,
            next_state,
            reward,
        });
    }

    Ok(Episode {
        transitions,
        terminal_reward,
        condition,
    })
}

/// Append-only store of transitions, grouped by control step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReplayMemory {
    horizon: usize,
    by_step: Vec<Vec<Transition>>,
    episode_count: usize,
}

impl ReplayMemory {
    pub fn new(horizon: usize) -> Self {
        Self {
            horizon,
            by_step: vec![Vec::new(); horizon],
            episode_count: 0,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn episode_count(&self) -> usize {
        self.episode_count
    }

    pub fn len(&self) -> usize {
        self.by_step.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.episode_count == 0
    }

    pub fn push_episode(&mut self, episode: &Episode) -> Result<()> {
        if episode.transitions.len() != self.horizon {
            return Err(Error::Contract(format!(
                "episode has {} transitions, memory expects {}",
                episode.transitions.len(),
                self.horizon
            )));
        }
        for (t, tr) in episode.transitions.iter().enumerate() {
            if tr.step != t {
                return Err(Error::Contract(format!(
                    "transition {t} is tagged with step {}",
                    tr.step
                )));
            }
        }
        for tr in &episode.transitions {
            self.by_step[tr.step].push(tr.clone());
        }
        self.episode_count += 1;
        Ok(())
    }

    /// All transitions of control step `t`, one per episode, in insertion order.
    pub fn replay_slice(&self, t: usize) -> Result<&[Transition]> {
        self.by_step.get(t).map(Vec::as_slice).ok_or_else(|| {
            Error::Range(format!("step {t} outside 0..{}", self.horizon))
        })
    }

    /// Entries in episode-major insertion order.
    pub fn entries(&self) -> impl Iterator<Item = &Transition> + '_ {
        (0..self.episode_count).flat_map(move |e| self.by_step.iter().map(move |s| &s[e]))
    }
}
