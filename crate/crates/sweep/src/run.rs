//! SNR sweeps: per fading block, optimize every strategy on conditional CSIT draws,
//! score the sum-rate on fresh draws and, in link-level mode, send one coded frame over
//! the true channel.
//!
//! Block `t` of every SNR point and every strategy shares the same estimate, error
//! draws, payloads and noise (all keyed by `(seed, t)`), so differences between
//! strategies and SNR points are paired.

use rayon::prelude::*;
use rsma_core::{
    averaged_rate_report, conditional_draws, draw_block, optimize_from, optimize_with_warm_starts, ChannelSet, CsitConfig, DrawPurpose, Optimized,
    OptimizerSettings, PrecoderSet, Strategy, StrategyKind,
};
use rsma_phy::{plan_streams, run_trial, Link, McsTable, ReceiverOptions, StreamAssignment, TrialRecord};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{AmcRule, ConfigError, ExperimentConfig, Mode};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("block {trial} at {snr_db} dB: {message}")]
    Block { snr_db: f64, trial: u64, message: String },
    #[error("link setup: {0}")]
    Link(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// One strategy on one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub strategy: StrategyKind,
    pub snr_db: f64,
    pub trial: u64,
    pub seed: u64,
    /// Sum-rate on the held-out conditional draws.
    pub sum_rate: f64,
    /// The rate floor could not be met.
    pub infeasible: bool,
    /// Strategy whose precoders carried the coded frame; differs from `strategy` when
    /// the rate-splitting transmitter falls back to an embedded SDMA or NOMA solution.
    pub link_precoders: Option<StrategyKind>,
    /// Coded frame outcome (link-level mode only).
    pub link: Option<TrialRecord>,
}

/// Aggregate for one `(strategy, SNR)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub strategy: StrategyKind,
    pub snr_db: f64,
    pub trials: usize,
    pub sum_rate: f64,
    pub sum_rate_ci95: f64,
    pub throughput: Option<f64>,
    pub throughput_ci95: Option<f64>,
    pub infeasible: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub fingerprint: String,
    pub points: Vec<PointResult>,
}

impl SweepResult {
    pub fn point(&self, strategy: StrategyKind, snr_db: f64) -> Option<&PointResult> {
        self.points.iter().find(|p| p.strategy == strategy && p.snr_db == snr_db)
    }

    pub fn series(&self, strategy: StrategyKind) -> Vec<&PointResult> {
        self.points.iter().filter(|p| p.strategy == strategy).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub result: SweepResult,
    /// Ordered by SNR point, then block, then strategy in config order.
    pub audit: Vec<AuditRecord>,
}

/// Mean and 95% half-width `1.96 s / sqrt(n)`.
pub fn mean_ci95(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

/// One fading block with the optimized precoders of each strategy it needed.
#[derive(Debug, Clone)]
pub struct BlockSolution {
    pub block: ChannelSet,
    /// Fresh conditional draws used for reported rates and link adaptation.
    pub held_out: Vec<ChannelSet>,
    pub rsma: Option<Optimized>,
    pub sdma: Option<Optimized>,
    pub noma: Option<Optimized>,
    /// Further rate-splitting solutions the link may send instead of `rsma`.
    pub rsma_alternatives: Vec<Optimized>,
}

impl BlockSolution {
    pub fn get(&self, kind: StrategyKind) -> Option<&Optimized> {
        match kind {
            StrategyKind::Rsma => self.rsma.as_ref(),
            StrategyKind::Sdma => self.sdma.as_ref(),
            StrategyKind::Noma => self.noma.as_ref(),
        }
    }
}

/// Everything shared by the blocks of one sweep.
pub struct SweepContext {
    pub config: ExperimentConfig,
    pub table: McsTable,
    pub link: Option<Link>,
    pub settings: OptimizerSettings,
}

impl SweepContext {
    pub fn new(config: ExperimentConfig, table: McsTable) -> Result<Self, SweepError> {
        config.validate()?;
        let link = if config.mode == Mode::Lls {
            table.check_block_length(config.block_length).map_err(|e| SweepError::Link(e.to_string()))?;
            Some(Link::new(table.clone(), config.block_length, config.list_size).map_err(|e| SweepError::Link(e.to_string()))?)
        } else {
            None
        };
        let settings = OptimizerSettings { qos_floor: config.r0, conditional_samples: config.conditional_samples, ..OptimizerSettings::default() };
        Ok(Self { config, table, link, settings })
    }

    /// Loads the configured MCS table (or the built-in one).
    pub fn from_config(config: ExperimentConfig) -> Result<Self, SweepError> {
        let table = match &config.amc_table {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.clone(), source })?;
                McsTable::from_toml(&text).map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?
            }
            None => McsTable::default_table(),
        };
        Self::new(config, table)
    }

    pub fn fingerprint(&self) -> String {
        self.config.fingerprint(&self.table.to_toml())
    }

    fn csit(&self, snr_db: f64) -> CsitConfig {
        let c = &self.config;
        let mut csit = CsitConfig::new(c.antennas, c.users, c.alpha, 10f64.powf(snr_db / 10.0), c.seed);
        csit.conditional_samples = c.conditional_samples;
        if c.perfect_csit {
            csit = csit.perfect();
        }
        csit
    }

    /// Draws block `trial` at `snr_db` and optimizes every strategy the configuration
    /// needs. Rate splitting is warm-started from the SDMA and NOMA solutions.
    pub fn solve_block(&self, snr_db: f64, trial: u64) -> Result<BlockSolution, SweepError> {
        let fail = |message: String| SweepError::Block { snr_db, trial, message };
        let c = &self.config;
        let csit = self.csit(snr_db);
        let power = csit.power_budget;
        let block: ChannelSet = draw_block(&csit, trial).map_err(|e| fail(e.to_string()))?;
        // Draws are identical without CSIT error, so one suffices.
        let (n_opt, n_eval) = if c.perfect_csit { (1, 1) } else { (c.conditional_samples, c.eval_samples) };
        let samples = conditional_draws(&block, &csit, trial, DrawPurpose::Optimize, n_opt).map_err(|e| fail(e.to_string()))?;
        let held_out = conditional_draws(&block, &csit, trial, DrawPurpose::Evaluate, n_eval).map_err(|e| fail(e.to_string()))?;

        let wants = |k: StrategyKind| c.strategies.contains(&k);
        let rsma = wants(StrategyKind::Rsma);
        let solve = |s: &Strategy, warm: &[PrecoderSet]| optimize_with_warm_starts(&samples, s, power, &self.settings, warm).map_err(|e| fail(e.to_string()));
        let sdma = if wants(StrategyKind::Sdma) || (rsma && c.users > 1) { Some(solve(&Strategy::Sdma, &[])?) } else { None };
        let noma = if wants(StrategyKind::Noma) || (rsma && c.users == 2) {
            Some(solve(&Strategy::for_estimate(StrategyKind::Noma, block.estimate()), &[])?)
        } else {
            None
        };
        let mut rsma_alternatives = Vec::new();
        let rsma = if rsma {
            let warm: Vec<PrecoderSet> = sdma.iter().chain(&noma).map(|o| o.precoders.clone()).collect();
            if self.settings.qos_floor > 0.0 && self.link.is_some() && c.users > 1 {
                // Under a floor the link can still start from the unconstrained SDMA
                // solution, with the floor met through the common stream.
                let free = OptimizerSettings { qos_floor: 0.0, ..self.settings.clone() };
                let sdma_free = optimize_with_warm_starts(&samples, &Strategy::Sdma, power, &free, &[]).map_err(|e| fail(e.to_string()))?;
                let lifted = optimize_from(&samples, &Strategy::Rsma, power, &self.settings, &sdma_free.precoders).map_err(|e| fail(e.to_string()))?;
                rsma_alternatives.push(lifted);
            }
            Some(solve(&Strategy::Rsma, &warm)?)
        } else {
            None
        };
        Ok(BlockSolution { block, held_out, rsma, sdma, noma, rsma_alternatives })
    }

    /// All configured strategies on block `trial` at `snr_db`.
    pub fn run_block(&self, snr_db: f64, trial: u64) -> Result<Vec<AuditRecord>, SweepError> {
        let fail = |message: String| SweepError::Block { snr_db, trial, message };
        let c = &self.config;
        let BlockSolution { block, held_out, rsma, sdma, noma, rsma_alternatives } = self.solve_block(snr_db, trial)?;

        c.strategies
            .iter()
            .map(|kind| {
                let opt: &Optimized = match kind {
                    StrategyKind::Rsma => rsma.as_ref(),
                    StrategyKind::Sdma => sdma.as_ref(),
                    StrategyKind::Noma => noma.as_ref(),
                }
                .expect("every configured strategy was optimized");
                let sum_rate = averaged_rate_report(&held_out, &opt.precoders).map_err(|e| fail(e.to_string()))?.sum_rate();
                let (link_precoders, link) = match &self.link {
                    Some(link) => {
                        // Rate splitting may carry any of its special cases.
                        let candidates: Vec<&Optimized> = match kind {
                            StrategyKind::Rsma => [Some(opt), sdma.as_ref(), noma.as_ref()].into_iter().flatten().chain(&rsma_alternatives).collect(),
                            _ => vec![opt],
                        };
                        let (used, assignment) = self.adapt(&held_out, &candidates).map_err(fail)?;
                        let rec = run_trial(&block, &used.precoders, &assignment, link, c.seed, trial, ReceiverOptions::default())
                            .map_err(|e| fail(e.to_string()))?;
                        (Some(used.strategy.kind()), Some(rec))
                    }
                    None => (None, None),
                };
                Ok(AuditRecord { strategy: *kind, snr_db, trial, seed: c.seed, sum_rate, infeasible: opt.qos.is_infeasible(), link_precoders, link })
            })
            .collect()
    }
}

impl SweepContext {
    /// Picks the candidate and stream MCSs to send. Candidates after the first are used
    /// only if their predicted goodput is strictly higher.
    fn adapt<'a>(&self, draws: &[ChannelSet], candidates: &[&'a Optimized]) -> Result<(&'a Optimized, StreamAssignment), String> {
        let c = &self.config;
        let mut best: Option<(&Optimized, StreamAssignment, f64)> = None;
        for opt in candidates {
            let (assignment, score) = match c.amc_rule {
                AmcRule::Goodput => plan_streams(draws, &opt.precoders, &self.table),
                AmcRule::Rate => {
                    let r = &opt.report;
                    (StreamAssignment::from_rates(&opt.precoders, r.rate_common, &r.rate_private, &self.table, c.backoff), 0.0)
                }
            };
            if best.as_ref().is_none_or(|b| score > b.2) {
                best = Some((opt, assignment, score));
            }
        }
        let (opt, assignment, _) = best.ok_or("no candidate precoders")?;
        Ok((opt, assignment))
    }
}

/// Reduces per-block records to one point per `(strategy, SNR)`, strategies in config
/// order and SNR ascending.
pub fn aggregate(config: &ExperimentConfig, audit: &[AuditRecord]) -> Vec<PointResult> {
    let mut points = Vec::new();
    for kind in &config.strategies {
        for snr in &config.snr_db {
            let recs: Vec<&AuditRecord> = audit.iter().filter(|r| r.strategy == *kind && r.snr_db == *snr).collect();
            let rates: Vec<f64> = recs.iter().map(|r| r.sum_rate).collect();
            let (sum_rate, sum_rate_ci95) = mean_ci95(&rates);
            let links: Vec<&TrialRecord> = recs.iter().filter_map(|r| r.link.as_ref()).collect();
            let (throughput, throughput_ci95) = if links.is_empty() {
                (None, None)
            } else {
                let per: Vec<f64> = links.iter().map(|l| l.recovered_bits.iter().sum::<u64>() as f64 / l.channel_uses as f64).collect();
                let bits: u64 = links.iter().flat_map(|l| &l.recovered_bits).sum();
                let uses: u64 = links.iter().map(|l| l.channel_uses).sum();
                (Some(bits as f64 / uses as f64), Some(mean_ci95(&per).1))
            };
            points.push(PointResult {
                strategy: *kind,
                snr_db: *snr,
                trials: recs.len(),
                sum_rate,
                sum_rate_ci95,
                throughput,
                throughput_ci95,
                infeasible: recs.iter().filter(|r| r.infeasible).count(),
            });
        }
    }
    points
}

/// Runs the configured sweep on `jobs` worker threads. Results do not depend on `jobs`.
pub fn run_sweep(config: &ExperimentConfig, jobs: usize) -> Result<SweepOutput, SweepError> {
    let ctx = SweepContext::from_config(config.clone())?;
    run_with_context(&ctx, jobs)
}

pub fn run_with_context(ctx: &SweepContext, jobs: usize) -> Result<SweepOutput, SweepError> {
    let c = &ctx.config;
    let trials = c.trials() as u64;
    let work: Vec<(f64, u64)> = c.snr_db.iter().flat_map(|s| (0..trials).map(move |t| (*s, t))).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| SweepError::Pool(e.to_string()))?;
    let blocks: Vec<Vec<AuditRecord>> = pool.install(|| work.par_iter().map(|(snr, t)| ctx.run_block(*snr, *t)).collect::<Result<_, _>>())?;
    let audit: Vec<AuditRecord> = blocks.into_iter().flatten().collect();
    let points = aggregate(c, &audit);
    Ok(SweepOutput { result: SweepResult { config: c.clone(), fingerprint: ctx.fingerprint(), points }, audit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ci_of_constant_is_zero() {
        assert_eq!(mean_ci95(&[2.0, 2.0, 2.0]), (2.0, 0.0));
        assert_eq!(mean_ci95(&[5.0]), (5.0, 0.0));
        let (m, h) = mean_ci95(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((h - 1.96 * (2f64.sqrt() / 2f64.sqrt())).abs() < 1e-12);
    }
}
