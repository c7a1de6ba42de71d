//! Feedforward ReLU regression networks trained full-batch with L-BFGS,
//! plus R² and k-fold cross-validation.
//!
//! Parameters live in one flat vector. For each layer in order the weight
//! matrix comes first, row-major with shape `(outputs, inputs)`, followed by
//! the bias vector. Hidden layers use the rectifier, the output layer is
//! linear with width one.

use std::fmt::Write as _;

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView2, ArrayViewMut2, Axis};
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Regression examples, one row of `inputs` per target.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub inputs: Array2<f64>,
    pub targets: Vec<f64>,
}

impl Dataset {
    pub fn new(inputs: Array2<f64>, targets: Vec<f64>) -> Result<Self> {
        if inputs.nrows() != targets.len() {
            return Err(Error::Shape {
                expected: inputs.nrows(),
                got: targets.len(),
            });
        }
        Ok(Self { inputs, targets })
    }

    pub fn from_rows(rows: &[Vec<f64>], targets: Vec<f64>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::Shape { expected: dim, got: r.len() });
            }
            flat.extend_from_slice(r);
        }
        let inputs = Array2::from_shape_vec((rows.len(), dim), flat).expect("checked shape");
        Self::new(inputs, targets)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            inputs: self.inputs.select(Axis(0), rows),
            targets: rows.iter().map(|&i| self.targets[i]).collect(),
        }
    }
}

/// Anything that maps an input row to a scalar prediction.
pub trait Regressor {
    fn input_dim(&self) -> usize;

    fn predict(&self, input: &[f64]) -> Result<f64>;

    fn predict_rows(&self, inputs: &Array2<f64>) -> Result<Vec<f64>> {
        inputs
            .rows()
            .into_iter()
            .map(|r| self.predict(&r.to_vec()))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

pub fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 || sizes.iter().any(|s| *s == 0) || *sizes.last().unwrap() != 1 {
        return Err(Error::Contract(format!(
            "layer sizes {sizes:?} must be positive and end in a single output"
        )));
    }
    Ok(())
}

impl Network {
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        check_sizes(sizes)?;
        Ok(Self {
            sizes: sizes.to_vec(),
            params: vec![0.0; param_count(sizes)],
        })
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        check_sizes(sizes)?;
        if params.len() != param_count(sizes) {
            return Err(Error::Shape {
                expected: param_count(sizes),
                got: params.len(),
            });
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            params,
        })
    }

    /// Weights uniform in `±scale / sqrt(fan_in)`, zero biases.
    pub fn random(sizes: &[usize], scale: f64, rng: &mut RngStream) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        let mut off = 0;
        for w in sizes.windows(2) {
            let (fan_in, out) = (w[0], w[1]);
            let bound = scale / (fan_in as f64).sqrt();
            for p in &mut net.params[off..off + fan_in * out] {
                *p = (2.0 * rng.uniform() - 1.0) * bound;
            }
            off += fan_in * out + out;
        }
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn weight_norm_sq(&self) -> f64 {
        weight_norm_sq(&self.sizes, &self.params)
    }

    pub fn forward(&self, input: &[f64]) -> Result<f64> {
        if input.len() != self.sizes[0] {
            return Err(Error::Shape {
                expected: self.sizes[0],
                got: input.len(),
            });
        }
        let mut act = input.to_vec();
        let mut off = 0;
        let layers = self.sizes.len() - 1;
        for (l, w) in self.sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &self.params[off..off + n_in * n_out];
            let bias = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
            let mut next = bias.to_vec();
            for (o, z) in next.iter_mut().enumerate() {
                let row = &weights[o * n_in..(o + 1) * n_in];
                *z += row.iter().zip(&act).map(|(a, b)| a * b).sum::<f64>();
                if l + 1 < layers {
                    *z = z.max(0.0);
                }
            }
            act = next;
            off += n_in * n_out + n_out;
        }
        Ok(act[0])
    }

    /// Flat-text dump: `sizes ...` then `params ...`, parameters in the
    /// documented order.
    pub fn to_text(&self) -> String {
        let mut out = String::from("sizes");
        for s in &self.sizes {
            let _ = write!(out, " {s}");
        }
        out.push_str("\nparams");
        for p in &self.params {
            let _ = write!(out, " {p}");
        }
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut field = |name: &str| -> Result<Vec<&str>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Data(format!("network dump is missing '{name}'")))?;
            let mut it = line.split_whitespace();
            if it.next() != Some(name) {
                return Err(Error::Data(format!("expected '{name}' line, got '{line}'")));
            }
            Ok(it.collect())
        };
        let sizes = field("sizes")?
            .iter()
            .map(|s| s.parse::<usize>().map_err(|e| Error::Data(format!("size '{s}': {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let params = field("params")?
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Data(format!("param '{s}': {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_params(&sizes, params)
    }
}

impl Regressor for Network {
    fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    fn predict(&self, input: &[f64]) -> Result<f64> {
        self.forward(input)
    }

    fn predict_rows(&self, inputs: &Array2<f64>) -> Result<Vec<f64>> {
        if inputs.ncols() != self.sizes[0] {
            return Err(Error::Shape {
                expected: self.sizes[0],
                got: inputs.ncols(),
            });
        }
        let mut act = inputs.clone();
        let mut off = 0;
        let layers = self.sizes.len() - 1;
        for (l, w) in self.sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = ArrayView2::from_shape((n_out, n_in), &self.params[off..off + n_in * n_out]).unwrap();
            let bias = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
            let mut z = act.dot(&weights.t());
            for mut row in z.rows_mut() {
                for (v, b) in row.iter_mut().zip(bias) {
                    *v += b;
                    if l + 1 < layers {
                        *v = v.max(0.0);
                    }
                }
            }
            act = z;
            off += n_in * n_out + n_out;
        }
        Ok(act.column(0).to_vec())
    }
}

fn weight_norm_sq(sizes: &[usize], params: &[f64]) -> f64 {
    let mut off = 0;
    let mut total = 0.0;
    for w in sizes.windows(2) {
        let n = w[0] * w[1];
        total += params[off..off + n].iter().map(|p| p * p).sum::<f64>();
        off += n + w[1];
    }
    total
}

/// Sum of squared errors plus `l2 * sum(weights^2)`; fills `grad` when given.
fn loss_and_grad(sizes: &[usize], params: &[f64], data: &Dataset, l2: f64, grad: Option<&mut [f64]>) -> f64 {
    let layers = sizes.len() - 1;
    let mut offsets = Vec::with_capacity(layers);
    let mut off = 0;
    for w in sizes.windows(2) {
        offsets.push(off);
        off += w[0] * w[1] + w[1];
    }

    // forward, keeping post-activation outputs of every layer
    let mut acts: Vec<Array2<f64>> = Vec::with_capacity(layers + 1);
    acts.push(data.inputs.clone());
    for l in 0..layers {
        let (n_in, n_out) = (sizes[l], sizes[l + 1]);
        let o = offsets[l];
        let weights = ArrayView2::from_shape((n_out, n_in), &params[o..o + n_in * n_out]).unwrap();
        let bias = &params[o + n_in * n_out..o + n_in * n_out + n_out];
        let mut z = acts[l].dot(&weights.t());
        let hidden = l + 1 < layers;
        for mut row in z.rows_mut() {
            for (v, b) in row.iter_mut().zip(bias) {
                *v += b;
                if hidden && *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        acts.push(z);
    }

    let out = &acts[layers];
    let residual: Array1<f64> = out.column(0).iter().zip(&data.targets).map(|(p, y)| p - y).collect();
    let loss = residual.iter().map(|r| r * r).sum::<f64>() + l2 * weight_norm_sq(sizes, params);

    let Some(grad) = grad else {
        return loss;
    };

    let mut delta: Array2<f64> = (2.0 * &residual).insert_axis(Axis(1));
    for l in (0..layers).rev() {
        let (n_in, n_out) = (sizes[l], sizes[l + 1]);
        let o = offsets[l];
        let (gw, rest) = grad[o..].split_at_mut(n_in * n_out);
        let gb = &mut rest[..n_out];
        let mut gw = ArrayViewMut2::from_shape((n_out, n_in), gw).unwrap();
        general_mat_mul(1.0, &delta.t(), &acts[l], 0.0, &mut gw);
        let weights = ArrayView2::from_shape((n_out, n_in), &params[o..o + n_in * n_out]).unwrap();
        gw.scaled_add(2.0 * l2, &weights);
        for (g, s) in gb.iter_mut().zip(delta.sum_axis(Axis(0))) {
            *g = s;
        }
        if l > 0 {
            let mut prev = delta.dot(&weights);
            // rectifier derivative: zero where the unit was inactive
            ndarray::Zip::from(&mut prev).and(&acts[l]).for_each(|d, a| {
                if *a <= 0.0 {
                    *d = 0.0;
                }
            });
            delta = prev;
        }
    }
    loss
}

fn check_data(net_input: usize, data: &Dataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Data("empty dataset".into()));
    }
    if data.dim() != net_input {
        return Err(Error::Shape {
            expected: net_input,
            got: data.dim(),
        });
    }
    Ok(())
}

/// Regularised sum-of-squares loss; biases are not penalised.
pub fn loss(net: &Network, data: &Dataset, l2: f64) -> Result<f64> {
    check_data(net.sizes[0], data)?;
    Ok(loss_and_grad(&net.sizes, &net.params, data, l2, None))
}

/// Analytic gradient of [`loss`], in parameter order.
pub fn gradient(net: &Network, data: &Dataset, l2: f64) -> Result<Vec<f64>> {
    check_data(net.sizes[0], data)?;
    let mut g = vec![0.0; net.params.len()];
    loss_and_grad(&net.sizes, &net.params, data, l2, Some(&mut g));
    Ok(g)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    /// Weight decay strength.
    pub l2: f64,
    /// Stop once the gradient's Euclidean norm falls below this.
    pub tolerance: f64,
    /// Stop once an accepted step lowers the loss by less than this fraction.
    pub relative_decrease: f64,
    pub max_iterations: usize,
    pub init_scale: f64,
    pub restarts: usize,
    /// Number of correction pairs kept by L-BFGS.
    pub memory: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            tolerance: 1e-6,
            relative_decrease: 1e-9,
            max_iterations: 500,
            init_scale: 1.0,
            restarts: 2,
            memory: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || self.max_iterations == 0 || self.restarts == 0 || self.memory == 0 {
            return Err(Error::Config(format!("invalid training config {self:?}")));
        }
        if !(self.l2 >= 0.0) || !(self.relative_decrease >= 0.0) || !(self.init_scale > 0.0) {
            return Err(Error::Config(format!("invalid training config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizeReport {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// Objective after the start point and after every accepted step.
    pub history: Vec<f64>,
}

/// L-BFGS with a backtracking Armijo line search. `fg(x, g)` returns the
/// objective and writes the gradient into `g`.
pub fn minimize_lbfgs<F>(mut fg: F, x0: Vec<f64>, cfg: &TrainConfig) -> Result<MinimizeReport>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    const ARMIJO: f64 = 1e-4;
    const MAX_BACKTRACKS: usize = 40;

    let n = x0.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut f = fg(&x, &mut g);
    if !f.is_finite() {
        return Err(Error::Numerical(format!(
            "objective is {f} at the start point (|x| = {:.3e})",
            dot(&x, &x).sqrt()
        )));
    }
    let mut history = vec![f];
    let mut s_mem: Vec<Vec<f64>> = Vec::new();
    let mut y_mem: Vec<Vec<f64>> = Vec::new();
    let mut rho: Vec<f64> = Vec::new();
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut iterations = 0;

    while iterations < cfg.max_iterations {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm <= cfg.tolerance {
            break;
        }

        // two-loop recursion
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let k = s_mem.len();
        let mut alpha = vec![0.0; k];
        for i in (0..k).rev() {
            alpha[i] = rho[i] * dot(&s_mem[i], &d);
            for (dj, yj) in d.iter_mut().zip(&y_mem[i]) {
                *dj -= alpha[i] * yj;
            }
        }
        if k > 0 {
            let gamma = dot(&s_mem[k - 1], &y_mem[k - 1]) / dot(&y_mem[k - 1], &y_mem[k - 1]);
            d.iter_mut().for_each(|v| *v *= gamma);
        }
        for i in 0..k {
            let beta = rho[i] * dot(&y_mem[i], &d);
            for (dj, sj) in d.iter_mut().zip(&s_mem[i]) {
                *dj += (alpha[i] - beta) * sj;
            }
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            s_mem.clear();
            y_mem.clear();
            rho.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }

        let mut step = if s_mem.is_empty() { (1.0 / gnorm).min(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            for i in 0..n {
                x_new[i] = x[i] + step * d[i];
            }
            let f_try = fg(&x_new, &mut g_new);
            if f_try.is_finite() && f_try <= f + ARMIJO * step * slope {
                accepted = Some(f_try);
                break;
            }
            // quadratic interpolation, kept within [0.1, 0.5] of the old step
            let next = if f_try.is_finite() {
                -slope * step * step / (2.0 * (f_try - f - slope * step))
            } else {
                0.1 * step
            };
            step = next.clamp(0.1 * step, 0.5 * step);
        }
        let Some(f_new) = accepted else {
            break;
        };
        iterations += 1;

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).max(f64::MIN_POSITIVE) {
            if s_mem.len() == cfg.memory {
                s_mem.remove(0);
                y_mem.remove(0);
                rho.remove(0);
            }
            s_mem.push(s);
            y_mem.push(y);
            rho.push(1.0 / sy);
        }

        let decrease = f - f_new;
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        f = f_new;
        history.push(f);
        if decrease <= cfg.relative_decrease * f.abs().max(1.0) {
            break;
        }
    }

    Ok(MinimizeReport {
        grad_norm: dot(&g, &g).sqrt(),
        x,
        value: f,
        iterations,
        history,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub loss: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub restart: usize,
}

/// Fits a fresh network of the given layer sizes. Each restart starts from
/// its own initialisation; the lowest final loss wins.
pub fn train_with_report(
    sizes: &[usize],
    data: &Dataset,
    cfg: &TrainConfig,
    rng: &RngStream,
) -> Result<(Network, TrainReport)> {
    cfg.validate()?;
    check_sizes(sizes)?;
    check_data(sizes[0], data)?;
    let mut best: Option<(Network, TrainReport)> = None;
    for restart in 0..cfg.restarts {
        let init = Network::random(sizes, cfg.init_scale, &mut rng.derive(&format!("restart{restart}")))?;
        let report = minimize_lbfgs(
            |p, g| loss_and_grad(sizes, p, data, cfg.l2, Some(g)),
            init.params,
            cfg,
        )
        .map_err(|e| match e {
            Error::Numerical(msg) => Error::Numerical(format!(
                "training {sizes:?} on {} examples, restart {restart}: {msg}",
                data.len()
            )),
            other => other,
        })?;
        let candidate = TrainReport {
            loss: report.value,
            grad_norm: report.grad_norm,
            iterations: report.iterations,
            restart,
        };
        if best.as_ref().is_none_or(|(_, b)| candidate.loss < b.loss) {
            best = Some((Network::from_params(sizes, report.x)?, candidate));
        }
    }
    Ok(best.expect("at least one restart"))
}

pub fn train(sizes: &[usize], data: &Dataset, cfg: &TrainConfig, rng: &RngStream) -> Result<Network> {
    Ok(train_with_report(sizes, data, cfg, rng)?.0)
}

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r2_score(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(Error::Shape {
            expected: targets.len(),
            got: predictions.len(),
        });
    }
    if targets.len() < 2 {
        return Err(Error::Data("R² needs at least two targets".into()));
    }
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    let ss_tot: f64 = targets.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Data("R² is undefined for constant targets".into()));
    }
    let ss_res: f64 = predictions.iter().zip(targets).map(|(p, y)| (y - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Mean held-out R² over `folds` shuffled folds, fitting with `fit`.
pub fn cross_validate_with<M, F>(data: &Dataset, folds: usize, rng: &RngStream, mut fit: F) -> Result<f64>
where
    M: Regressor,
    F: FnMut(&Dataset, &RngStream) -> Result<M>,
{
    if folds < 2 {
        return Err(Error::Data(format!("cross-validation needs at least 2 folds, got {folds}")));
    }
    if data.len() < folds {
        return Err(Error::Data(format!("{} examples cannot fill {folds} folds", data.len())));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng.derive("shuffle"));
    let n = data.len();
    let mut total = 0.0;
    for k in 0..folds {
        let (lo, hi) = (k * n / folds, (k + 1) * n / folds);
        let held: Vec<usize> = order[lo..hi].to_vec();
        let train_rows: Vec<usize> = order[..lo].iter().chain(&order[hi..]).copied().collect();
        let model = fit(&data.subset(&train_rows), &rng.derive(&format!("fold{k}")))?;
        let test = data.subset(&held);
        total += r2_score(&model.predict_rows(&test.inputs)?, &test.targets)?;
    }
    Ok(total / folds as f64)
}

/// k-fold cross-validation of a network architecture.
pub fn cross_validate(data: &Dataset, sizes: &[usize], folds: usize, cfg: &TrainConfig, rng: &RngStream) -> Result<f64> {
    cross_validate_with(data, folds, rng, |d, r| train(sizes, d, cfg, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_substream;

    fn linear_data(n: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / n as f64]).collect();
        let targets = rows.iter().map(|r| 2.0 * r[0]).collect();
        Dataset::from_rows(&rows, targets).unwrap()
    }

    #[test]
    fn weight_count_formula() {
        let net = Network::zeros(&[17, 50, 50, 1]).unwrap();
        assert_eq!(net.params().len(), 17 * 50 + 50 + 50 * 50 + 50 + 50 + 1);
        assert!(Network::zeros(&[3, 4, 2]).is_err());
    }

    #[test]
    fn forward_simple_cases() {
        let zero = Network::zeros(&[3, 4, 4, 1]).unwrap();
        assert_eq!(zero.forward(&[1.0, -2.0, 3.0]).unwrap(), 0.0);
        // 1-1-1-1 with unit weights and zero biases passes positives through
        let ident = Network::from_params(&[1, 1, 1, 1], vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(ident.forward(&[2.0]).unwrap(), 2.0);
        assert!(matches!(ident.forward(&[1.0, 2.0]), Err(Error::Shape { .. })));
        let net = Network::random(&[3, 5, 5, 1], 1.0, &mut rng_substream(1, "init")).unwrap();
        let x = [0.3, 0.1, -0.7];
        assert_eq!(net.forward(&x).unwrap(), net.forward(&x).unwrap());
        let batch = Array2::from_shape_vec((1, 3), x.to_vec()).unwrap();
        assert!((net.predict_rows(&batch).unwrap()[0] - net.forward(&x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn loss_cases() {
        let ident = Network::from_params(&[1, 1, 1, 1], vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        let perfect = Dataset::from_rows(&[vec![1.0], vec![2.0]], vec![1.0, 2.0]).unwrap();
        assert_eq!(loss(&ident, &perfect, 0.0).unwrap(), 0.0);
        let single = Dataset::from_rows(&[vec![4.0]], vec![1.0]).unwrap();
        assert_eq!(loss(&ident, &single, 0.0).unwrap(), 9.0);
        assert!(loss(&ident, &single, 0.1).unwrap() > 9.0);
        let empty = Dataset::from_rows(&[], vec![]).unwrap();
        assert!(matches!(loss(&ident, &empty, 0.0), Err(Error::Data(_))));
    }

    #[test]
    fn gradient_cases() {
        let ident = Network::from_params(&[1, 1, 1, 1], vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        let perfect = Dataset::from_rows(&[vec![1.0], vec![2.0]], vec![1.0, 2.0]).unwrap();
        assert!(gradient(&ident, &perfect, 0.0).unwrap().iter().all(|g| *g == 0.0));
        // only the regulariser remains: 2 * l2 * w on weights, 0 on biases
        let g = gradient(&ident, &perfect, 0.5).unwrap();
        assert_eq!(g, vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn fits_a_line() {
        let data = linear_data(20);
        let net = train(&[1, 10, 10, 1], &data, &TrainConfig::default(), &rng_substream(3, "init")).unwrap();
        let pred = net.predict_rows(&data.inputs).unwrap();
        let rmse = (pred.iter().zip(&data.targets).map(|(p, y)| (p - y).powi(2)).sum::<f64>() / 20.0).sqrt();
        assert!(rmse < 1e-2, "rmse {rmse}");
    }

    #[test]
    fn fits_a_constant() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![(i % 7) as f64 / 7.0, (i % 3) as f64]).collect();
        let data = Dataset::from_rows(&rows, vec![4.5; 30]).unwrap();
        let net = train(&[2, 10, 10, 1], &data, &TrainConfig::default(), &rng_substream(4, "init")).unwrap();
        let pred = net.predict_rows(&data.inputs).unwrap();
        let rmse = (pred.iter().map(|p| (p - 4.5).powi(2)).sum::<f64>() / 30.0).sqrt();
        assert!(rmse < 1e-3, "rmse {rmse}");
    }

    #[test]
    fn training_is_deterministic_and_monotone() {
        let data = linear_data(25);
        let cfg = TrainConfig::default();
        let rng = rng_substream(8, "init");
        let a = train(&[1, 6, 6, 1], &data, &cfg, &rng).unwrap();
        let b = train(&[1, 6, 6, 1], &data, &cfg, &rng).unwrap();
        assert_eq!(a, b);

        let init = Network::random(&[1, 6, 6, 1], 1.0, &mut rng_substream(8, "x")).unwrap();
        let rep = minimize_lbfgs(
            |p, g| loss_and_grad(&[1, 6, 6, 1], p, &data, cfg.l2, Some(g)),
            init.params,
            &cfg,
        )
        .unwrap();
        assert!(rep.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn non_finite_targets_are_reported() {
        let data = Dataset::from_rows(&[vec![1.0], vec![2.0]], vec![f64::NAN, 1.0]).unwrap();
        let err = train(&[1, 2, 1], &data, &TrainConfig::default(), &rng_substream(1, "i")).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)), "{err}");
    }

    #[test]
    fn r2_cases() {
        let y = [1.0, 2.0, 3.0];
        assert_eq!(r2_score(&y, &y).unwrap(), 1.0);
        assert_eq!(r2_score(&[2.0, 2.0, 2.0], &y).unwrap(), 0.0);
        assert!((r2_score(&[1.0, 2.0, 5.0], &y).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(r2_score(&y, &[1.0, 1.0, 1.0]), Err(Error::Data(_))));
    }

    #[test]
    fn cross_validation_on_linear_data() {
        let data = linear_data(40);
        let cfg = TrainConfig::default();
        let rng = rng_substream(11, "cv");
        let score = cross_validate(&data, &[1, 10, 10, 1], 5, &cfg, &rng).unwrap();
        assert!(score > 0.99, "{score}");
        assert_eq!(score, cross_validate(&data, &[1, 10, 10, 1], 5, &cfg, &rng).unwrap());
        let tiny = linear_data(4);
        assert!(matches!(cross_validate(&tiny, &[1, 2, 1], 5, &cfg, &rng), Err(Error::Data(_))));
    }

    #[test]
    fn dump_round_trip() {
        let net = Network::random(&[2, 3, 1], 1.0, &mut rng_substream(2, "d")).unwrap();
        assert_eq!(Network::from_text(&net.to_text()).unwrap(), net);
    }
}
