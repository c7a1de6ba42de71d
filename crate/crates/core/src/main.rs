use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use drawctl::harness::{self, RunConfig};
use drawctl::observer::ObservabilityMode;
use drawctl::{Error, Result};

#[derive(Parser)]
#[command(name = "drawctl", version, about = "Fitted Q-learning experiments on a surrogate deep-drawing plant")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    scenario: Option<ObservabilityMode>,
    #[arg(long, global = true)]
    episodes: Option<usize>,
    /// Disable sensor noise while learning.
    #[arg(long, global = true)]
    no_noise: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate cost-term extrema from random episodes.
    Calibrate,
    /// Enumerate all trajectories and report baseline and oracle values.
    Oracle {
        /// Also write the full reward matrix.
        #[arg(long)]
        matrix: bool,
    },
    /// Run one learning experiment.
    Train,
    /// Evaluate the saved ensemble greedily at every friction level.
    Evaluate,
    /// Train over the learning-rate / exploration-rate grid.
    Sweep,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_text(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        if let Some(scenario) = self.scenario {
            cfg.scenario = scenario;
        }
        if let Some(episodes) = self.episodes {
            cfg.episodes = episodes;
        }
        if self.no_noise {
            cfg.env.noise = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = cli.common.resolve()?;
    match cli.command {
        Command::Calibrate => {
            let cal = harness::cmd_calibrate(&cfg)?;
            print!("{}", cal.to_text());
        }
        Command::Oracle { matrix } => {
            let s = harness::cmd_oracle(&cfg, matrix)?;
            print!("{}", s.to_csv());
        }
        Command::Train => {
            let summary = harness::cmd_train(&cfg)?;
            let o = &summary.outcome;
            println!("episodes {}", o.episodes);
            println!("retrainings {}", o.checkpoints.len());
            if let Some(last) = o.checkpoints.last() {
                println!("expected_reward {}", last.evaluation.expected);
                println!("r2 {:?}", last.r2);
            }
            println!("metrics {}", summary.metrics.display());
            if let Some(e) = &summary.ensemble {
                println!("ensemble {}", e.display());
            }
        }
        Command::Evaluate => {
            let e = harness::cmd_evaluate(&cfg)?;
            println!("expected_reward {}", e.expected);
        }
        Command::Sweep => {
            let r = harness::cmd_sweep(&cfg)?;
            print!("{}", harness::sweep::aggregate_csv(&r.cells));
            for (dir, msg) in &r.failures {
                eprintln!("failed {}: {msg}", dir.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("drawctl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
