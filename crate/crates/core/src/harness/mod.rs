//! Configuration, the training loop, metrics files and the command
//! implementations behind the `drawctl` binary.

pub mod commands;
pub mod config;
pub mod metrics;
pub mod persist;
pub mod run;
pub mod sweep;

pub use commands::{cmd_calibrate, cmd_evaluate, cmd_oracle, cmd_train, ensure_calibration, train_into, TrainSummary};
pub use config::{load_config, RunConfig};
pub use metrics::{parse_metrics, read_metrics, MetricsRow, MetricsWriter, METRICS_HEADER};
pub use persist::SavedEnsemble;
pub use run::{run_training, Checkpoint, TrainOutcome};
pub use sweep::{aggregate_from_files, cmd_sweep, CellSummary, SweepReport};
