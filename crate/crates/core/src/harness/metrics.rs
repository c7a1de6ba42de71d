//! Per-episode metrics CSV.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::observer::ObservabilityMode;

pub const METRICS_HEADER: &str =
    "episode,epsilon,reward,friction,expected_reward,r2_t1,r2_t2,r2_t3,r2_t4,scenario,seed";

/// Number of R² columns in the file.
pub const R2_COLUMNS: usize = 4;

/// One learning episode. `episode` counts from 1; `epsilon` is the
/// exploration rate the episode was acted with.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub episode: usize,
    pub epsilon: f64,
    pub reward: f64,
    pub friction: f64,
    /// Expected greedy reward, only on episodes that ended with a retraining.
    pub expected_reward: Option<f64>,
    /// Cross-validated R² of `Q_1..Q_4`, only where it was computed.
    pub r2: [Option<f64>; R2_COLUMNS],
    pub scenario: ObservabilityMode,
    pub seed: u64,
}

fn opt(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        let _ = write!(out, "{v}");
    }
}

impl MetricsRow {
    pub fn to_csv_line(&self) -> String {
        let mut out = format!("{},{},{},{},", self.episode, self.epsilon, self.reward, self.friction);
        opt(&mut out, self.expected_reward);
        for r in &self.r2 {
            out.push(',');
            opt(&mut out, *r);
        }
        let _ = write!(out, ",{},{}", self.scenario, self.seed);
        out
    }

    pub fn from_csv_line(line: &str) -> Result<Self> {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 11 {
            return Err(Error::Data(format!("expected 11 columns, got {}: '{line}'", cells.len())));
        }
        let bad = |c: &str, e: &dyn std::fmt::Display| Error::Data(format!("cell '{c}': {e}"));
        let num = |c: &str| c.parse::<f64>().map_err(|e| bad(c, &e));
        let opt = |c: &str| if c.is_empty() { Ok(None) } else { num(c).map(Some) };
        Ok(Self {
            episode: cells[0].parse().map_err(|e| bad(cells[0], &e))?,
            epsilon: num(cells[1])?,
            reward: num(cells[2])?,
            friction: num(cells[3])?,
            expected_reward: opt(cells[4])?,
            r2: [opt(cells[5])?, opt(cells[6])?, opt(cells[7])?, opt(cells[8])?],
            scenario: cells[9].parse()?,
            seed: cells[10].parse().map_err(|e| bad(cells[10], &e))?,
        })
    }
}

/// Parses a metrics file. A trailing line without a newline is an
/// interrupted write and is ignored.
pub fn parse_metrics(text: &str) -> Result<Vec<MetricsRow>> {
    let complete = match text.rfind('\n') {
        Some(end) => &text[..end],
        None => "",
    };
    let mut lines = complete.lines();
    match lines.next() {
        Some(h) if h == METRICS_HEADER => {}
        Some(h) => return Err(Error::Data(format!("unexpected metrics header '{h}'"))),
        None => return Ok(Vec::new()),
    }
    lines.map(MetricsRow::from_csv_line).collect()
}

pub fn read_metrics(path: impl AsRef<Path>) -> Result<Vec<MetricsRow>> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path, e))?;
    parse_metrics(&text)
}

/// Writes rows as they arrive and flushes after each one.
pub struct MetricsWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl MetricsWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = Self {
            out: BufWriter::new(file),
            path,
        };
        w.line(METRICS_HEADER)?;
        Ok(w)
    }

    fn line(&mut self, line: &str) -> Result<()> {
        writeln!(self.out, "{line}")
            .and_then(|_| self.out.flush())
            .map_err(|e| Error::io(&self.path, e))
    }

    pub fn write(&mut self, row: &MetricsRow) -> Result<()> {
        self.line(&row.to_csv_line())
    }
}
