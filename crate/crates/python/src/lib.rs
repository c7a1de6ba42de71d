//! Python bindings for `drawctl`.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use drawctl::drawsim::{calibrate_extrema, DrawingProcess};
use drawctl::harness::{self, SavedEnsemble};
use drawctl::mdp::Environment;
use drawctl::neural::{self, Dataset, Regressor, TrainConfig};
use drawctl::oracle::{enumerate_rewards, OracleSummary};
use drawctl::qlearn::evaluate_greedy;
use drawctl::rng::rng_substream;
use drawctl::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::Numerical(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Run configuration; `text` uses the same `key=value` lines as config files.
#[pyclass(name = "RunConfig")]
struct PyRunConfig {
    inner: harness::RunConfig,
}

#[pymethods]
impl PyRunConfig {
    #[new]
    #[pyo3(signature = (text = ""))]
    fn new(text: &str) -> PyResult<Self> {
        let inner = harness::RunConfig::from_text(text).map_err(py_err)?;
        Ok(Self { inner })
    }

    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        self.inner.set(key, value).map_err(PyValueError::new_err)
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(py_err)
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn scenario(&self) -> &'static str {
        self.inner.scenario.as_str()
    }

    #[getter]
    fn episodes(&self) -> usize {
        self.inner.episodes
    }

    #[getter]
    fn out(&self) -> PathBuf {
        self.inner.out.clone()
    }

    fn action_values(&self) -> Vec<f64> {
        self.inner.env.action_values()
    }

    fn friction_masses(&self) -> PyResult<Vec<f64>> {
        self.inner.env.friction.masses().map_err(py_err)
    }
}

fn calibration(config: &harness::RunConfig) -> PyResult<drawctl::drawsim::Calibration> {
    let mut rng = rng_substream(config.calibration_seed, "calibration");
    calibrate_extrema(&config.env, config.calibration_samples, &mut rng).map_err(py_err)
}

/// Calibration text (`name=min,max,weight` lines) for `config`.
#[pyfunction]
fn calibrate(config: &PyRunConfig) -> PyResult<String> {
    Ok(calibration(&config.inner)?.to_text())
}

/// Baseline, blind and full-information values from exhaustive enumeration.
#[pyfunction]
fn oracle<'py>(py: Python<'py>, config: &PyRunConfig) -> PyResult<Bound<'py, PyDict>> {
    let cfg = &config.inner;
    cfg.validate().map_err(py_err)?;
    let matrix = enumerate_rewards(&cfg.env, &calibration(cfg)?).map_err(py_err)?;
    let masses = cfg.env.friction.masses().map_err(py_err)?;
    let s = OracleSummary::compute(&matrix, &masses, cfg.nominal_bin).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("nominal_bin", s.nominal_bin + 1)?;
    d.set_item("baseline_trajectory", s.baseline_trajectory)?;
    d.set_item("expected_baseline", s.expected_baseline)?;
    d.set_item("v_blind", s.v_blind)?;
    d.set_item("v_full", s.v_full)?;
    Ok(d)
}

/// Trained Q ensemble with the scenario it was trained for.
#[pyclass(name = "Ensemble")]
struct PyEnsemble {
    inner: SavedEnsemble,
}

#[pymethods]
impl PyEnsemble {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: SavedEnsemble::load(path).map_err(py_err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(path).map_err(py_err)
    }

    #[getter]
    fn scenario(&self) -> &'static str {
        self.inner.scenario.as_str()
    }

    /// Greedy action index at step `t` for an encoded state.
    fn greedy(&self, t: usize, state: Vec<f64>) -> PyResult<usize> {
        self.inner.ensemble.greedy(t, &state).map_err(py_err)
    }

    fn q_values(&self, t: usize, state: Vec<f64>) -> PyResult<Vec<Option<f64>>> {
        self.inner.ensemble.q_values(t, &state).map_err(py_err)
    }

    /// Friction-weighted greedy reward and the per-bin rewards.
    fn evaluate(&self, config: &PyRunConfig) -> PyResult<(f64, Vec<f64>)> {
        let cfg = &config.inner;
        let rng = rng_substream(cfg.seed, "python-evaluation");
        let ev = evaluate_greedy(&self.inner.ensemble, &cfg.env, &calibration(cfg)?, self.inner.scenario, cfg.eval, &rng)
            .map_err(py_err)?;
        Ok((ev.expected, ev.per_bin))
    }
}

/// Runs the learning loop. Returns `(episode, expected_reward)` after every
/// retraining and the final ensemble, if any retraining happened.
#[pyfunction]
fn train(py: Python<'_>, config: &PyRunConfig) -> PyResult<(Vec<(usize, f64)>, Option<PyEnsemble>)> {
    let cfg = config.inner.clone();
    let cal = calibration(&cfg)?;
    let outcome = py
        .detach(|| harness::run_training(&cfg, &cal, |_| Ok(())))
        .map_err(py_err)?;
    let curve = outcome.checkpoints.iter().map(|c| (c.episode, c.evaluation.expected)).collect();
    let ensemble = outcome.ensemble.map(|e| PyEnsemble {
        inner: SavedEnsemble {
            scenario: cfg.scenario,
            ensemble: e,
        },
    });
    Ok((curve, ensemble))
}

/// The surrogate plant, stepped one action at a time.
#[pyclass(name = "Plant")]
struct PyPlant {
    inner: DrawingProcess,
}

#[pymethods]
impl PyPlant {
    #[new]
    #[pyo3(signature = (config, seed = 0))]
    fn new(config: &PyRunConfig, seed: u64) -> PyResult<Self> {
        let cfg = &config.inner;
        let inner = DrawingProcess::new(
            cfg.env.clone(),
            calibration(cfg)?,
            rng_substream(seed, "friction"),
            rng_substream(seed, "noise"),
        )
        .map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Starts a new part; `bin` pins the friction bin (0-based).
    #[pyo3(signature = (bin = None))]
    fn reset(&mut self, bin: Option<usize>) -> PyResult<usize> {
        self.inner.pin_friction(bin).map_err(py_err)?;
        self.inner.reset();
        Ok(self.inner.friction_bin())
    }

    #[getter]
    fn friction(&self) -> f64 {
        self.inner.friction()
    }

    /// Applies action `action`; returns `(observation, reward, terminal)`.
    fn step(&mut self, action: usize) -> PyResult<(Vec<f64>, f64, bool)> {
        let out = self.inner.step(action).map_err(py_err)?;
        Ok((out.observation, out.reward, out.terminal))
    }
}

/// Two-hidden-layer ReLU regression network.
#[pyclass(name = "Network")]
struct PyNetwork {
    inner: neural::Network,
}

#[pymethods]
impl PyNetwork {
    /// Fits a network of the given layer sizes to `inputs` / `targets`.
    #[staticmethod]
    #[pyo3(signature = (sizes, inputs, targets, seed = 0, l2 = 1e-4, max_iterations = 500))]
    fn fit(
        py: Python<'_>,
        sizes: Vec<usize>,
        inputs: Vec<Vec<f64>>,
        targets: Vec<f64>,
        seed: u64,
        l2: f64,
        max_iterations: usize,
    ) -> PyResult<Self> {
        let data = Dataset::from_rows(&inputs, targets).map_err(py_err)?;
        let cfg = TrainConfig {
            l2,
            max_iterations,
            ..Default::default()
        };
        let rng = rng_substream(seed, "python-network");
        let inner = py.detach(|| neural::train(&sizes, &data, &cfg, &rng)).map_err(py_err)?;
        Ok(Self { inner })
    }

    fn predict(&self, inputs: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        inputs.iter().map(|x| self.inner.predict(x)).collect::<drawctl::Result<_>>().map_err(py_err)
    }

    #[getter]
    fn sizes(&self) -> Vec<usize> {
        self.inner.sizes().to_vec()
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }
}

#[pyfunction]
fn r2_score(predictions: Vec<f64>, targets: Vec<f64>) -> PyResult<f64> {
    neural::r2_score(&predictions, &targets).map_err(py_err)
}

#[pymodule]
fn pydrawctl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRunConfig>()?;
    m.add_class::<PyEnsemble>()?;
    m.add_class::<PyPlant>()?;
    m.add_class::<PyNetwork>()?;
    m.add_function(wrap_pyfunction!(calibrate, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(r2_score, m)?)?;
    Ok(())
}
