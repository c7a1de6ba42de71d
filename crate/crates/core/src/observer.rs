//! Surrogate states built by concatenating the action/observation history of
//! the current episode.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// What the agent gets to see, fixed for a whole run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ObservabilityMode {
    /// History plus the true per-episode condition.
    Full,
    /// Action and observation history.
    Partial,
    /// Action history only; learning runs on the reward signal alone.
    Blind,
}

impl ObservabilityMode {
    pub const ALL: [ObservabilityMode; 3] = [Self::Full, Self::Partial, Self::Blind];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::Partial => "partial",
            Self::Blind => "blind",
        }
    }
}

impl fmt::Display for ObservabilityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObservabilityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => Ok(Self::Full),
            "partial" => Ok(Self::Partial),
            "blind" => Ok(Self::Blind),
            other => Err(Error::Config(format!(
                "unknown scenario '{other}', expected full, partial or blind"
            ))),
        }
    }
}

/// `(action_index, observation)` pairs of the current episode.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct History {
    steps: Vec<(usize, Vec<f64>)>,
}

impl History {
    pub fn push(&mut self, action_index: usize, observation: Vec<f64>) {
        self.steps.push((action_index, observation));
    }

    pub fn clear(&mut self) {
        self.steps.clear();
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[(usize, Vec<f64>)] {
        &self.steps
    }
}

/// Surrogate state dimension `n_t` at step `t`.
pub fn state_dim(
    mode: ObservabilityMode,
    observation_dim: usize,
    t: usize,
    horizon: usize,
) -> Result<usize> {
    if t >= horizon {
        return Err(Error::Range(format!("step {t} outside 0..{horizon}")));
    }
    Ok(match mode {
        ObservabilityMode::Partial => (observation_dim + 1) * t,
        ObservabilityMode::Blind => t,
        ObservabilityMode::Full => (observation_dim + 1) * t + 1,
    })
}

/// Fixed affine scaling of actions and observables into roughly `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Observer {
    mode: ObservabilityMode,
    action_values: Vec<f64>,
    observation_ranges: Vec<(f64, f64)>,
}

impl Observer {
    /// `action_values[i]` is the normalised value of action `i`;
    /// `observation_ranges` holds the nominal `(low, high)` of each channel.
    pub fn new(
        mode: ObservabilityMode,
        action_values: Vec<f64>,
        observation_ranges: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if action_values.is_empty() || observation_ranges.is_empty() {
            return Err(Error::Contract("observer needs actions and channels".into()));
        }
        if let Some((lo, hi)) = observation_ranges.iter().find(|(lo, hi)| !(hi > lo)) {
            return Err(Error::Contract(format!(
                "observation range [{lo}, {hi}] is empty"
            )));
        }
        Ok(Self {
            mode,
            action_values,
            observation_ranges,
        })
    }

    pub fn mode(&self) -> ObservabilityMode {
        self.mode
    }

    pub fn action_values(&self) -> &[f64] {
        &self.action_values
    }

    pub fn observation_dim(&self) -> usize {
        self.observation_ranges.len()
    }

    pub fn state_dim(&self, t: usize, horizon: usize) -> Result<usize> {
        state_dim(self.mode, self.observation_dim(), t, horizon)
    }

    /// Encodes the history; `condition` is only used in full mode.
    pub fn encode(&self, history: &History, condition: f64) -> Result<Vec<f64>> {
        let friction = (self.mode == ObservabilityMode::Full).then_some(condition);
        self.surrogate_state(history, friction)
    }

    /// Chronological concatenation, per completed step, of the normalised
    /// action and (unless blind) the normalised observables, followed by the
    /// condition in full mode. `condition` must be given exactly in full mode.
    pub fn surrogate_state(&self, history: &History, condition: Option<f64>) -> Result<Vec<f64>> {
        match (self.mode, condition) {
            (ObservabilityMode::Full, None) => {
                return Err(Error::Contract("full observability needs the condition".into()))
            }
            (ObservabilityMode::Partial | ObservabilityMode::Blind, Some(_)) => {
                return Err(Error::Contract(format!(
                    "{} observability must not see the condition",
                    self.mode
                )))
            }
            _ => {}
        }
        let per_step = match self.mode {
            ObservabilityMode::Blind => 1,
            _ => 1 + self.observation_dim(),
        };
        let mut state = Vec::with_capacity(per_step * history.len() + 1);
        for (action, obs) in history.steps() {
            let value = self.action_values.get(*action).ok_or_else(|| {
                Error::Range(format!("action {action} outside 0..{}", self.action_values.len()))
            })?;
            state.push(*value);
            if self.mode != ObservabilityMode::Blind {
                if obs.len() != self.observation_dim() {
                    return Err(Error::Shape {
                        expected: self.observation_dim(),
                        got: obs.len(),
                    });
                }
                state.extend(
                    obs.iter()
                        .zip(&self.observation_ranges)
                        .map(|(o, (lo, hi))| (o - lo) / (hi - lo)),
                );
            }
        }
        if let Some(c) = condition {
            state.push(c);
        }
        Ok(state)
    }
}
