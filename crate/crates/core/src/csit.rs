//! Fading-block generation under the Gaussian CSIT error model.
//!
//! The transmitter knows an estimate `H_hat` with i.i.d. `CN(0, 1)` entries; the true
//! channel is `H = sqrt(1 - s^2) H_hat + s H_err` with i.i.d. `CN(0, 1)` error entries and
//! error variance `s^2 = P^-alpha`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ChannelSet, ModelError};
use crate::rng::{domain, CounterStream};
use crate::scalar::{Cx, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CsitError {
    #[error("power {power} below 1 with alpha {alpha} > 0 would give error variance above 1")]
    PowerBelowUnity { power: f64, alpha: f64 },
    #[error("invalid CSIT configuration: {0}")]
    Config(String),
    #[error("conditional draw count must be at least 1")]
    ZeroCount,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `sigma_e^2 = P^-alpha`.
pub fn error_variance<T: Scalar>(power: T, alpha: T) -> Result<T, CsitError> {
    if !(power > T::zero()) || !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(CsitError::Config(format!("power {power} must be positive and alpha {alpha} in [0, 1]")));
    }
    if power < T::one() && alpha > T::zero() {
        return Err(CsitError::PowerBelowUnity { power: power.to_f64_lossy(), alpha: alpha.to_f64_lossy() });
    }
    Ok(power.powf(-alpha))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsitConfig {
    pub num_tx_antennas: usize,
    pub num_users: usize,
    /// CSIT quality scaling factor in `[0, 1]`.
    pub alpha: f64,
    /// Linear transmit power `P` (SNR with unit noise).
    pub power_budget: f64,
    pub seed: u64,
    /// `H_err` draws per estimate for sample-average optimization and evaluation.
    pub conditional_samples: usize,
    /// Forces `sigma_e = 0` regardless of `alpha`.
    pub perfect: bool,
    pub noise_var: f64,
}

impl CsitConfig {
    pub fn new(num_tx_antennas: usize, num_users: usize, alpha: f64, power_budget: f64, seed: u64) -> Self {
        Self { num_tx_antennas, num_users, alpha, power_budget, seed, conditional_samples: 64, perfect: false, noise_var: 1.0 }
    }

    pub fn perfect(mut self) -> Self {
        self.perfect = true;
        self.conditional_samples = 1;
        self
    }

    pub fn validate(&self) -> Result<(), CsitError> {
        if self.num_tx_antennas == 0 || self.num_users == 0 {
            return Err(CsitError::Config("antenna and user counts must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(CsitError::Config(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if !(self.power_budget > 0.0) || !(self.noise_var > 0.0) {
            return Err(CsitError::Config("power and noise variance must be positive".into()));
        }
        if self.conditional_samples == 0 {
            return Err(CsitError::Config("conditional_samples must be positive".into()));
        }
        Ok(())
    }

    /// `sigma_e` for this configuration.
    pub fn error_std<T: Scalar>(&self) -> Result<T, CsitError> {
        if self.perfect {
            return Ok(T::zero());
        }
        Ok(error_variance(T::of(self.power_budget), T::of(self.alpha))?.sqrt())
    }
}

/// Which error stream a set of conditional draws comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DrawPurpose {
    /// The block's own (true) error realization.
    TrueError,
    /// Samples used by the precoder optimizer.
    Optimize,
    /// Held-out samples for rate evaluation.
    Evaluate,
}

impl DrawPurpose {
    fn domain(self) -> u64 {
        match self {
            DrawPurpose::TrueError => domain::TRUE_ERROR,
            DrawPurpose::Optimize => domain::OPTIMIZE_ERROR,
            DrawPurpose::Evaluate => domain::EVALUATE_ERROR,
        }
    }
}

fn gaussian_matrix<T: Scalar>(stream: &mut CounterStream, users: usize, antennas: usize) -> Vec<Vec<Cx<T>>> {
    (0..users)
        .map(|_| {
            (0..antennas)
                .map(|_| {
                    let (re, im) = stream.complex_normal(1.0);
                    Cx::new(T::of(re), T::of(im))
                })
                .collect()
        })
        .collect()
}

fn error_draw<T: Scalar>(config: &CsitConfig, block_index: u64, purpose: DrawPurpose, sample: u64) -> Vec<Vec<Cx<T>>> {
    let mut s = CounterStream::new(config.seed, purpose.domain(), block_index, sample);
    gaussian_matrix(&mut s, config.num_users, config.num_tx_antennas)
}

/// Fading block `block_index`: estimate and true error are both keyed by
/// `(seed, block_index)`, so the same pair always gives the same block.
pub fn draw_block<T: Scalar>(config: &CsitConfig, block_index: u64) -> Result<ChannelSet<T>, CsitError> {
    config.validate()?;
    let mut s = CounterStream::new(config.seed, domain::ESTIMATE, block_index, 0);
    let estimate = gaussian_matrix(&mut s, config.num_users, config.num_tx_antennas);
    let error = error_draw(config, block_index, DrawPurpose::TrueError, 0);
    let noise = vec![T::of(config.noise_var); config.num_users];
    Ok(ChannelSet::compose(estimate, error, config.error_std()?, noise)?)
}

/// `count` blocks sharing `base`'s estimate, each with an independent error draw.
///
/// Draw `i` uses error substream `i` of `purpose` for `block_index`; with
/// [`DrawPurpose::TrueError`] and `count = 1` this reproduces the block itself.
pub fn conditional_draws<T: Scalar>(
    base: &ChannelSet<T>,
    config: &CsitConfig,
    block_index: u64,
    purpose: DrawPurpose,
    count: usize,
) -> Result<Vec<ChannelSet<T>>, CsitError> {
    if count == 0 {
        return Err(CsitError::ZeroCount);
    }
    (0..count as u64).map(|i| Ok(base.with_error(error_draw(config, block_index, purpose, i))?)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn error_variance_examples() {
        assert_eq!(error_variance(100.0, 0.0).unwrap(), 1.0);
        assert_eq!(error_variance(1.0, 0.7).unwrap(), 1.0);
        assert_relative_eq!(error_variance(100.0, 0.6).unwrap(), 10f64.powf(-1.2), max_relative = 1e-14);
        assert_relative_eq!(error_variance(100.0, 0.6).unwrap(), 0.063096, epsilon = 1e-6);
    }

    #[test]
    fn error_variance_rejects_sub_unit_power() {
        assert!(matches!(error_variance(0.5, 0.3), Err(CsitError::PowerBelowUnity { .. })));
        assert_eq!(error_variance(0.5, 0.0).unwrap(), 1.0);
        assert!(error_variance(10.0, 1.5).is_err());
    }

    #[test]
    fn error_variance_decreases_in_alpha() {
        let p = 50.0;
        let mut prev = f64::INFINITY;
        for i in 0..=10 {
            let v = error_variance(p, i as f64 / 10.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn alpha_zero_true_channel_is_error() {
        let cfg = CsitConfig::new(2, 2, 0.0, 1000.0, 3);
        let b = draw_block::<f64>(&cfg, 5).unwrap();
        assert_eq!(b.error_std(), 1.0);
        assert_eq!(b.true_channels(), b.error());
    }

    #[test]
    fn perfect_flag_true_channel_is_estimate() {
        let cfg = CsitConfig::new(2, 2, 0.6, 1000.0, 3).perfect();
        let b = draw_block::<f64>(&cfg, 5).unwrap();
        assert_eq!(b.error_std(), 0.0);
        assert_eq!(b.true_channels(), b.estimate());
        let samples = conditional_draws(&b, &cfg, 5, DrawPurpose::Optimize, 4).unwrap();
        assert!(samples.iter().all(|s| s.true_channels() == b.estimate()));
    }

    #[test]
    fn block_is_deterministic_in_seed_and_index() {
        let cfg = CsitConfig::new(3, 2, 0.6, 100.0, 11);
        assert_eq!(draw_block::<f64>(&cfg, 4).unwrap(), draw_block::<f64>(&cfg, 4).unwrap());
        assert_ne!(draw_block::<f64>(&cfg, 4).unwrap(), draw_block::<f64>(&cfg, 5).unwrap());
    }

    #[test]
    fn true_error_single_draw_reproduces_block() {
        let cfg = CsitConfig::new(2, 2, 0.6, 100.0, 11);
        let b = draw_block::<f64>(&cfg, 9).unwrap();
        let again = conditional_draws(&b, &cfg, 9, DrawPurpose::TrueError, 1).unwrap();
        assert_eq!(again[0], b);
    }

    #[test]
    fn zero_count_is_an_error() {
        let cfg = CsitConfig::new(2, 2, 0.6, 100.0, 11);
        let b = draw_block::<f64>(&cfg, 0).unwrap();
        assert_eq!(conditional_draws(&b, &cfg, 0, DrawPurpose::Optimize, 0).unwrap_err(), CsitError::ZeroCount);
    }

    #[test]
    fn composition_identity_holds() {
        let cfg = CsitConfig::new(4, 3, 0.4, 300.0, 2);
        let b = draw_block::<f64>(&cfg, 1).unwrap();
        let s = b.error_std();
        for k in 0..3 {
            for j in 0..4 {
                let expected = b.estimate()[k][j] * (1.0 - s * s).sqrt() + b.error()[k][j] * s;
                assert!((b.true_channels()[k][j] - expected).norm() <= 1e-12);
            }
        }
    }
}
