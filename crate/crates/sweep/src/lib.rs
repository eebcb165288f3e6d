//! Monte-Carlo experiments over SNR grids: ergodic sum-rates, coded throughput
//! (recovered bits over channel uses) and high-SNR DoF slopes, with deterministic
//! counter-keyed seeding so results do not depend on the worker count.

pub mod config;
pub mod dof;
pub mod output;
pub mod plot;
pub mod run;

pub use config::{AmcRule, ConfigError, ExperimentConfig, Mode};
pub use dof::{estimate_dof, DofEstimate, DofReport};
pub use output::{parse_csv, read_audit, render_audit, render_csv, resum_throughput, write_outputs, CsvRow, OutputError, CSV_HEADER};
pub use plot::emit_plot;
pub use run::{aggregate, mean_ci95, run_sweep, AuditRecord, BlockSolution, PointResult, SweepContext, SweepError, SweepOutput, SweepResult};
