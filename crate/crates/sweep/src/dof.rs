//! High-SNR slope estimates against the predicted degrees of freedom.

use rsma_core::{dof_slope, predicted_dof_rsma, predicted_dof_sdma, StrategyKind};
use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig, Mode};
use crate::run::{run_sweep, SweepError, SweepOutput};

/// Minimum grid span and lowest grid point (dB) for a slope fit.
pub const MIN_SPAN_DB: f64 = 15.0;
pub const MIN_SNR_DB: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DofEstimate {
    pub strategy: StrategyKind,
    pub measured: f64,
    /// `max(1, K alpha)` for SDMA, `1 + (K - 1) alpha` for RSMA; none for NOMA.
    pub predicted: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DofReport {
    pub sweep: SweepOutput,
    pub estimates: Vec<DofEstimate>,
}

pub fn predicted_dof(strategy: StrategyKind, users: usize, alpha: f64) -> Option<f64> {
    match strategy {
        StrategyKind::Sdma => Some(predicted_dof_sdma(users, alpha)),
        StrategyKind::Rsma => Some(predicted_dof_rsma(users, alpha)),
        StrategyKind::Noma => None,
    }
}

pub fn check_dof_grid(grid: &[f64]) -> Result<(), ConfigError> {
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    if lo < MIN_SNR_DB {
        return Err(ConfigError::Invalid(format!("DoF grid must start at {MIN_SNR_DB} dB or above, starts at {lo}")));
    }
    if hi - lo < MIN_SPAN_DB {
        return Err(ConfigError::Invalid(format!("DoF grid must span at least {MIN_SPAN_DB} dB, spans {}", hi - lo)));
    }
    Ok(())
}

/// Runs the sum-rate sweep in DoF mode and fits one slope per strategy.
pub fn estimate_dof(config: &ExperimentConfig, jobs: usize) -> Result<DofReport, SweepError> {
    let mut config = config.clone();
    config.mode = Mode::Dof;
    config.validate()?;
    check_dof_grid(&config.snr_db)?;
    let sweep = run_sweep(&config, jobs)?;
    let estimates = config
        .strategies
        .iter()
        .map(|s| {
            let pts: Vec<(f64, f64)> = sweep.result.series(*s).iter().map(|p| (p.snr_db, p.sum_rate)).collect();
            let measured = dof_slope(&pts).map_err(|e| SweepError::Config(ConfigError::Invalid(e.to_string())))?;
            Ok(DofEstimate { strategy: *s, measured, predicted: predicted_dof(*s, config.users, config.alpha) })
        })
        .collect::<Result<_, SweepError>>()?;
    Ok(DofReport { sweep, estimates })
}
