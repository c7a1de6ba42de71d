//! Text dump of a trained network ensemble.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::neural::Network;
use crate::observer::ObservabilityMode;
use crate::qlearn::{FirstStep, Q0Table, QEnsemble};

/// An ensemble together with the observability mode it was trained for.
#[derive(Clone, Debug, PartialEq)]
pub struct SavedEnsemble {
    pub scenario: ObservabilityMode,
    pub ensemble: QEnsemble<Network>,
}

fn join(values: impl IntoIterator<Item = String>) -> String {
    values.into_iter().collect::<Vec<_>>().join(" ")
}

impl SavedEnsemble {
    pub fn to_text(&self) -> String {
        let e = &self.ensemble;
        let mut out = format!("scenario {}\nhorizon {}\n", self.scenario, e.horizon());
        let _ = writeln!(out, "actions {}", join(e.action_values.iter().map(|v| v.to_string())));
        match &e.first {
            FirstStep::Table(t) => {
                let cells = t.values.iter().map(|v| v.map_or("-".to_string(), |v| v.to_string()));
                let _ = writeln!(out, "q0 {}", join(cells));
            }
            FirstStep::Model(net) => {
                out.push_str("step 0\n");
                out.push_str(&net.to_text());
            }
        }
        for (i, net) in e.models.iter().enumerate() {
            let _ = writeln!(out, "step {}", i + 1);
            out.push_str(&net.to_text());
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let mut pos = 0;
        let mut next = |key: &str| -> Result<Vec<String>> {
            let line = lines
                .get(pos)
                .ok_or_else(|| Error::Data(format!("ensemble dump ends before '{key}'")))?;
            pos += 1;
            let mut it = line.split_whitespace();
            if it.next() != Some(key) {
                return Err(Error::Data(format!("expected '{key}', got '{line}'")));
            }
            Ok(it.map(str::to_string).collect())
        };
        let bad = |s: &str| Error::Data(format!("malformed value '{s}' in ensemble dump"));
        let single = |v: Vec<String>| v.into_iter().next().ok_or_else(|| bad(""));

        let scenario: ObservabilityMode = single(next("scenario")?)?.parse()?;
        let h = single(next("horizon")?)?;
        let horizon: usize = h.parse().map_err(|_| bad(&h))?;
        if horizon < 2 {
            return Err(Error::Data(format!("horizon {horizon} in ensemble dump")));
        }
        let action_values = next("actions")?
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| bad(s)))
            .collect::<Result<Vec<_>>>()?;
        let network = |next: &mut dyn FnMut(&str) -> Result<Vec<String>>| -> Result<Network> {
            let sizes = next("sizes")?.join(" ");
            let params = next("params")?.join(" ");
            Network::from_text(&format!("sizes {sizes}\nparams {params}\n"))
        };
        let first = if lines.get(3).is_some_and(|l| l.starts_with("q0")) {
            let cells = next("q0")?
                .iter()
                .map(|s| if s == "-" { Ok(None) } else { s.parse::<f64>().map(Some).map_err(|_| bad(s)) })
                .collect::<Result<Vec<_>>>()?;
            FirstStep::Table(Q0Table { values: cells })
        } else {
            next("step")?;
            FirstStep::Model(network(&mut next)?)
        };
        let mut models = Vec::with_capacity(horizon - 1);
        for t in 1..horizon {
            let idx = single(next("step")?)?;
            if idx != t.to_string() {
                return Err(Error::Data(format!("expected step {t}, got step {idx}")));
            }
            models.push(network(&mut next)?);
        }
        Ok(Self {
            scenario,
            ensemble: QEnsemble {
                action_values,
                first,
                models,
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_text()).map_err(|e| Error::io(&path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        Self::from_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_substream;

    fn net(sizes: &[usize], label: &str) -> Network {
        Network::random(sizes, 1.0, &mut rng_substream(3, label)).unwrap()
    }

    #[test]
    fn round_trips_both_first_step_kinds() {
        let tabular = SavedEnsemble {
            scenario: ObservabilityMode::Partial,
            ensemble: QEnsemble {
                action_values: vec![0.5, 1.0],
                first: FirstStep::Table(Q0Table { values: vec![Some(4.25), None] }),
                models: vec![net(&[5, 3, 3, 1], "a"), net(&[9, 3, 3, 1], "b")],
            },
        };
        let modelled = SavedEnsemble {
            scenario: ObservabilityMode::Full,
            ensemble: QEnsemble {
                action_values: vec![0.5, 1.0],
                first: FirstStep::Model(net(&[2, 3, 3, 1], "c")),
                models: vec![net(&[6, 3, 3, 1], "d")],
            },
        };
        for saved in [tabular, modelled] {
            assert_eq!(SavedEnsemble::from_text(&saved.to_text()).unwrap(), saved);
        }
    }

    #[test]
    fn rejects_truncated_dump() {
        let saved = SavedEnsemble {
            scenario: ObservabilityMode::Blind,
            ensemble: QEnsemble {
                action_values: vec![1.0],
                first: FirstStep::Table(Q0Table { values: vec![Some(1.0)] }),
                models: vec![net(&[2, 2, 2, 1], "e")],
            },
        };
        let text = saved.to_text();
        let cut: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(matches!(SavedEnsemble::from_text(&cut), Err(Error::Data(_))));
    }
}
