use std::collections::HashMap;

use drawctl::drawsim::{DrawingProcess, EnvironmentConfig};
use drawctl::mdp::Environment;
use drawctl::observer::{History, ObservabilityMode};
use drawctl::oracle::decode_trajectory;
use drawctl::rng::rng_substream;

fn calibrated(cfg: &EnvironmentConfig) -> drawctl::drawsim::Calibration {
    drawctl::drawsim::calibrate_extrema(cfg, 100, &mut rng_substream(0, "calibration")).unwrap()
}

#[test]
fn partial_states_separate_distinct_observations() {
    let cfg = EnvironmentConfig { noise: false, ..Default::default() };
    let observer = cfg.observer(ObservabilityMode::Partial).unwrap();
    let mut env =
        DrawingProcess::new(cfg.clone(), calibrated(&cfg), rng_substream(0, "f"), rng_substream(0, "n")).unwrap();
    // state bits -> (actions, raw observations) of the first prefix that produced it
    let mut seen: HashMap<Vec<u64>, (Vec<usize>, Vec<Vec<u64>>)> = HashMap::new();
    let prefixes = cfg.action_count().pow(cfg.horizon as u32 - 1);
    for bin in 0..cfg.friction.bins {
        env.pin_friction(Some(bin)).unwrap();
        for p in 0..prefixes {
            let actions = decode_trajectory(p, cfg.action_count(), cfg.horizon - 1);
            env.reset();
            let mut history = History::default();
            let mut raw = Vec::new();
            for (t, a) in actions.iter().enumerate() {
                let out = env.step(*a).unwrap();
                raw.push(out.observation.iter().map(|v| v.to_bits()).collect());
                history.push(*a, out.observation);
                let state: Vec<u64> = observer.encode(&history, 0.0).unwrap().iter().map(|v| v.to_bits()).collect();
                let entry = (actions[..=t].to_vec(), raw.clone());
                match seen.get(&state) {
                    Some(first) => assert_eq!(first, &entry, "distinct observations share a state"),
                    None => {
                        seen.insert(state, entry);
                    }
                }
            }
        }
    }
    assert!(seen.len() > prefixes);
}

#[test]
fn noisy_normalised_components_stay_near_unit_range() {
    let cfg = EnvironmentConfig::default();
    let observer = cfg.observer(ObservabilityMode::Partial).unwrap();
    let mut env = DrawingProcess::new(cfg.clone(), calibrated(&cfg), rng_substream(4, "f"), rng_substream(4, "n")).unwrap();
    let mut rng = rng_substream(4, "policy");
    for _ in 0..2000 {
        env.reset();
        let mut history = History::default();
        for _ in 0..cfg.horizon {
            let a = rng.index(cfg.action_count());
            history.push(a, env.step(a).unwrap().observation);
        }
        for v in observer.encode(&history, 0.0).unwrap() {
            assert!((-0.2..=1.2).contains(&v), "component {v}");
        }
    }
}
