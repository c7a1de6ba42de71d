//! Exact ground truth for the noise-free plant.
//!
//! Every open-loop trajectory is evaluated at every friction bin. From the
//! resulting matrix follow the nominal-friction baseline, the best open-loop
//! value `v_blind` and the friction-aware optimum `v_full`. A recursive
//! backward induction over the per-friction decision tree cross-checks the
//! column maxima.

use std::fmt::Write as _;
use std::path::Path;

use crate::drawsim::{terminal_costs, Calibration, EnvironmentConfig, LatentState};
use crate::error::{Error, Result};

/// Noise-free terminal rewards, rows = trajectories in lexicographic order
/// (first action most significant), columns = friction bins.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardMatrix {
    rows: usize,
    cols: usize,
    horizon: usize,
    action_count: usize,
    data: Vec<f64>,
}

impl RewardMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    /// Action indices of trajectory `row`.
    pub fn trajectory(&self, row: usize) -> Vec<usize> {
        decode_trajectory(row, self.action_count, self.horizon)
    }

    pub fn row_of(&self, trajectory: &[usize]) -> Result<usize> {
        if trajectory.len() != self.horizon {
            return Err(Error::Shape {
                expected: self.horizon,
                got: trajectory.len(),
            });
        }
        trajectory.iter().try_fold(0usize, |acc, &a| {
            if a >= self.action_count {
                Err(Error::Range(format!("action {a} outside 0..{}", self.action_count)))
            } else {
                Ok(acc * self.action_count + a)
            }
        })
    }

    /// Lowest row attaining the maximum of column `col`.
    pub fn column_argmax(&self, col: usize) -> usize {
        let mut best = 0;
        for r in 1..self.rows {
            if self.get(r, col) > self.get(best, col) {
                best = r;
            }
        }
        best
    }

    pub fn column_max(&self, col: usize) -> f64 {
        self.get(self.column_argmax(col), col)
    }

    /// `trajectory,bin_1,...,bin_n` with the trajectory as dash-joined indices.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trajectory");
        for c in 0..self.cols {
            let _ = write!(out, ",bin_{}", c + 1);
        }
        out.push('\n');
        for r in 0..self.rows {
            let traj: Vec<String> = self.trajectory(r).iter().map(usize::to_string).collect();
            out.push_str(&traj.join("-"));
            for v in self.row(r) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn decode_trajectory(mut row: usize, action_count: usize, horizon: usize) -> Vec<usize> {
    let mut out = vec![0; horizon];
    for slot in out.iter_mut().rev() {
        *slot = row % action_count;
        row /= action_count;
    }
    out
}

/// Evaluates every trajectory at every friction bin without noise.
pub fn enumerate_rewards(config: &EnvironmentConfig, calibration: &Calibration) -> Result<RewardMatrix> {
    config.validate()?;
    let a = config.action_count();
    let rows = a
        .checked_pow(config.horizon as u32)
        .ok_or_else(|| Error::Range("trajectory space too large to enumerate".into()))?;
    let cols = config.friction.bins;
    let values = config.action_values();
    let mut data = vec![0.0; rows * cols];
    let mut path = vec![LatentState::default(); config.horizon + 1];
    for col in 0..cols {
        let m = config.friction.normalized(col);
        // walk rows in order, recomputing only the suffix that changed
        let mut prev: Option<Vec<usize>> = None;
        for row in 0..rows {
            let traj = decode_trajectory(row, a, config.horizon);
            let start = match &prev {
                Some(p) => p.iter().zip(&traj).take_while(|(x, y)| x == y).count(),
                None => 0,
            };
            for t in start..config.horizon {
                path[t + 1] = config.dynamics.step(&path[t], values[traj[t]], m)?;
            }
            data[row * cols + col] = calibration.reward(&terminal_costs(&path[config.horizon], config.horizon)?)?;
            prev = Some(traj);
        }
    }
    Ok(RewardMatrix {
        rows,
        cols,
        horizon: config.horizon,
        action_count: a,
        data,
    })
}

/// Best open-loop trajectory for friction bin `nominal_bin` (0-based).
pub fn baseline_trajectory(matrix: &RewardMatrix, nominal_bin: usize) -> Result<Vec<usize>> {
    if nominal_bin >= matrix.cols {
        return Err(Error::Range(format!("bin {nominal_bin} outside 0..{}", matrix.cols)));
    }
    Ok(matrix.trajectory(matrix.column_argmax(nominal_bin)))
}

fn check_masses(matrix: &RewardMatrix, masses: &[f64]) -> Result<()> {
    if masses.len() != matrix.cols {
        return Err(Error::Shape {
            expected: matrix.cols,
            got: masses.len(),
        });
    }
    Ok(())
}

/// Friction-weighted reward of one fixed trajectory.
pub fn expected_baseline(matrix: &RewardMatrix, masses: &[f64], trajectory: &[usize]) -> Result<f64> {
    check_masses(matrix, masses)?;
    let row = matrix.row_of(trajectory)?;
    Ok(matrix.row(row).iter().zip(masses).map(|(r, p)| r * p).sum())
}

/// Best friction-weighted reward of any open-loop trajectory, with its row.
pub fn v_blind_with_row(matrix: &RewardMatrix, masses: &[f64]) -> Result<(f64, usize)> {
    check_masses(matrix, masses)?;
    let mut best = (f64::NEG_INFINITY, 0);
    for r in 0..matrix.rows {
        let v: f64 = matrix.row(r).iter().zip(masses).map(|(x, p)| x * p).sum();
        if v > best.0 {
            best = (v, r);
        }
    }
    Ok(best)
}

pub fn v_blind(matrix: &RewardMatrix, masses: &[f64]) -> Result<f64> {
    Ok(v_blind_with_row(matrix, masses)?.0)
}

/// Expected reward of a controller that knows the friction from the start.
pub fn v_full(matrix: &RewardMatrix, masses: &[f64]) -> Result<f64> {
    check_masses(matrix, masses)?;
    Ok((0..matrix.cols).map(|c| masses[c] * matrix.column_max(c)).sum())
}

/// Optimal value and (lowest) optimal trajectory of the deterministic tree at
/// a pinned friction bin, by backward induction `V_t(x) = max_u V_{t+1}(x')`.
/// The terminal reward is discounted by `gamma^(T-1)`.
pub fn dp_solve(
    config: &EnvironmentConfig,
    calibration: &Calibration,
    bin: usize,
    gamma: f64,
) -> Result<(f64, Vec<usize>)> {
    config.validate()?;
    if bin >= config.friction.bins {
        return Err(Error::Range(format!("bin {bin} outside 0..{}", config.friction.bins)));
    }
    let values = config.action_values();
    let m = config.friction.normalized(bin);

    fn value(
        config: &EnvironmentConfig,
        calibration: &Calibration,
        values: &[f64],
        m: f64,
        gamma: f64,
        x: &LatentState,
    ) -> Result<(f64, Vec<usize>)> {
        let last = x.t + 1 == config.horizon;
        let mut best: Option<(f64, Vec<usize>)> = None;
        for (u, f) in values.iter().enumerate() {
            let next = config.dynamics.step(x, *f, m)?;
            let (v, mut tail) = if last {
                (calibration.reward(&terminal_costs(&next, config.horizon)?)?, Vec::new())
            } else {
                let (v, tail) = value(config, calibration, values, m, gamma, &next)?;
                (gamma * v, tail)
            };
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                tail.insert(0, u);
                best = Some((v, tail));
            }
        }
        Ok(best.expect("non-empty action set"))
    }

    value(config, calibration, &values, m, gamma, &LatentState::default())
}

pub fn dp_value(config: &EnvironmentConfig, calibration: &Calibration, bin: usize) -> Result<f64> {
    Ok(dp_solve(config, calibration, bin, 1.0)?.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleSummary {
    pub nominal_bin: usize,
    pub baseline_trajectory: Vec<usize>,
    pub expected_baseline: f64,
    pub v_blind: f64,
    pub v_full: f64,
}

impl OracleSummary {
    pub fn compute(matrix: &RewardMatrix, masses: &[f64], nominal_bin: usize) -> Result<Self> {
        let baseline = baseline_trajectory(matrix, nominal_bin)?;
        Ok(Self {
            nominal_bin,
            expected_baseline: expected_baseline(matrix, masses, &baseline)?,
            baseline_trajectory: baseline,
            v_blind: v_blind(matrix, masses)?,
            v_full: v_full(matrix, masses)?,
        })
    }

    pub const CSV_HEADER: &'static str = "nominal_bin,baseline_trajectory,expected_baseline,v_blind,v_full";

    /// Header plus one row; the bin is 1-based and the trajectory is dash-joined.
    pub fn to_csv(&self) -> String {
        let traj: Vec<String> = self.baseline_trajectory.iter().map(usize::to_string).collect();
        format!(
            "{}\n{},{},{},{},{}\n",
            Self::CSV_HEADER,
            self.nominal_bin + 1,
            traj.join("-"),
            self.expected_baseline,
            self.v_blind,
            self.v_full
        )
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(Self::CSV_HEADER) {
            return Err(Error::Data("oracle summary header mismatch".into()));
        }
        let row = lines.next().ok_or_else(|| Error::Data("oracle summary has no row".into()))?;
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != 5 {
            return Err(Error::Data(format!("oracle summary row has {} cells", cells.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Data(format!("'{s}': {e}")));
        let bin: usize = cells[0].parse().map_err(|e| Error::Data(format!("bin '{}': {e}", cells[0])))?;
        let traj = cells[1]
            .split('-')
            .map(|a| a.parse::<usize>().map_err(|e| Error::Data(format!("trajectory '{}': {e}", cells[1]))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            nominal_bin: bin.checked_sub(1).ok_or_else(|| Error::Data("bin is 1-based".into()))?,
            baseline_trajectory: traj,
            expected_baseline: num(cells[2])?,
            v_blind: num(cells[3])?,
            v_full: num(cells[4])?,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_csv()).map_err(|e| Error::io(path, e))
    }
}
