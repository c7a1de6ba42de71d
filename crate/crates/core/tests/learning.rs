mod common;

use drawctl::drawsim::{DrawingProcess, EnvironmentConfig};
use drawctl::harness::{run_training, RunConfig};
use drawctl::mdp::{run_episode, ReplayMemory};
use drawctl::neural::{cross_validate, train, Dataset, TrainConfig};
use drawctl::observer::ObservabilityMode;
use drawctl::qlearn::{build_targets, ExplorationSchedule, NetworkFitter, QFitter};
use drawctl::rng::rng_substream;

use common::default_calibration;

fn random_memory(episodes: usize, seed: u64) -> ReplayMemory {
    let cfg = EnvironmentConfig::default();
    let observer = cfg.observer(ObservabilityMode::Partial).unwrap();
    let mut env =
        DrawingProcess::new(cfg.clone(), default_calibration(&cfg), rng_substream(seed, "f"), rng_substream(seed, "n"))
            .unwrap();
    let mut rng = rng_substream(seed, "policy");
    let mut memory = ReplayMemory::new(cfg.horizon);
    for _ in 0..episodes {
        env.reset();
        let ep = run_episode(&mut env, &mut |_: usize, _: &[f64]| Ok(rng.index(7)), &observer).unwrap();
        assert_eq!(ep.transitions.len(), cfg.horizon);
        memory.push_episode(&ep).unwrap();
    }
    memory
}

#[test]
fn memory_holds_every_transition() {
    let memory = random_memory(1000, 3);
    assert_eq!(memory.len(), 1000 * 5);
    assert_eq!(memory.episode_count(), 1000);
    for t in 0..5 {
        assert_eq!(memory.replay_slice(t).unwrap().len(), 1000);
    }
}

#[test]
fn refitting_a_step_on_the_same_inputs_is_reproducible() {
    let memory = random_memory(80, 4);
    let fitter = NetworkFitter {
        small: 5,
        large: 5,
        train: TrainConfig { max_iterations: 60, ..Default::default() },
    };
    let av = EnvironmentConfig::default().action_values();
    let q4 = fitter.fit(4, &build_targets::<drawctl::neural::Network>(&memory, 4, None, None, 0.7, 1.0, &av).unwrap(), &rng_substream(1, "q4")).unwrap();
    let fit_q3 = || {
        let data = build_targets(&memory, 3, None, Some(&q4), 0.7, 1.0, &av).unwrap();
        fitter.fit(3, &data, &rng_substream(1, "q3")).unwrap()
    };
    assert_eq!(fit_q3(), fit_q3());
}

#[test]
fn exploration_rate_strictly_decreases() {
    let s = ExplorationSchedule { epsilon0: 0.3, decay: 1e-3 };
    for i in 0..5000 {
        assert!(s.epsilon(i + 1) < s.epsilon(i));
    }
}

#[test]
fn cross_validation_does_not_change_what_is_learned() {
    let mut with_cv = RunConfig::from_text("episodes=110\nmax_iterations=40\nhidden_small=4\nhidden_large=6\n").unwrap();
    let mut without = with_cv.clone();
    with_cv.learner.folds = 5;
    without.learner.folds = 0;
    let cal = default_calibration(&with_cv.env);
    let a = run_training(&with_cv, &cal, |_| Ok(())).unwrap();
    let b = run_training(&without, &cal, |_| Ok(())).unwrap();
    assert_eq!(a.ensemble, b.ensemble);
    assert_eq!(a.checkpoints.len(), 2);
    for (x, y) in a.checkpoints.iter().zip(&b.checkpoints) {
        assert_eq!(x.evaluation, y.evaluation);
        assert!(x.r2.iter().all(|r| r.is_finite()));
        assert!(y.r2.iter().all(|r| r.is_nan()));
    }
}

#[test]
fn pure_noise_is_not_learnable() {
    let cfg = TrainConfig { max_iterations: 200, ..Default::default() };
    let mut scores = Vec::new();
    for seed in 0..5 {
        let mut rng = rng_substream(seed, "noise-data");
        let rows: Vec<Vec<f64>> = (0..60).map(|_| vec![rng.uniform(), rng.uniform()]).collect();
        let targets = (0..60).map(|_| rng.uniform()).collect();
        let data = Dataset::from_rows(&rows, targets).unwrap();
        scores.push(cross_validate(&data, &[2, 4, 4, 1], 5, &cfg, &rng_substream(seed, "cv")).unwrap());
    }
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    assert!(mean <= 0.1, "mean R² {mean} on noise ({scores:?})");
}

#[test]
fn stronger_regularisation_shrinks_weights() {
    let mut rng = rng_substream(9, "reg-data");
    let rows: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.uniform(), rng.uniform()]).collect();
    let targets = rows.iter().map(|r| (3.0 * r[0]).sin() + r[1] * r[1]).collect();
    let data = Dataset::from_rows(&rows, targets).unwrap();
    let norms: Vec<f64> = [1e-4, 1e-2, 1.0]
        .iter()
        .map(|&l2| {
            let cfg = TrainConfig { l2, max_iterations: 300, restarts: 1, ..Default::default() };
            train(&[2, 6, 6, 1], &data, &cfg, &rng_substream(9, "reg")).unwrap().weight_norm_sq()
        })
        .collect();
    assert!(norms.windows(2).all(|w| w[1] <= w[0]), "{norms:?}");
}
