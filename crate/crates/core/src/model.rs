//! Downlink MISO broadcast-channel signal and rate model for 1-layer rate splitting.
//!
//! One common stream `s_c` (decoded by every user, precoder `p_c`) and one private
//! stream `s_k` per user (precoder `p_k`) are superposed:
//!
//! ```text
//! x   = p_c s_c + sum_k p_k s_k
//! y_k = h_k^H x + n_k,              n_k ~ CN(0, sigma_k^2)
//! ```
//!
//! Each user first decodes the common stream treating every private stream as noise,
//! removes it, then decodes its own private stream. SDMA is the special case
//! `p_c = 0`; NOMA (two users) is expressed through the mapping documented in
//! [`crate::precoder::noma`].
//!
//! All inner products are `h^H p`, conjugate on the channel.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{inner, norm_sqr};
use crate::scalar::{Cx, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    Dimension { what: &'static str, expected: usize, found: usize },
    #[error("user index {index} out of range for {users} users")]
    UserIndex { index: usize, users: usize },
    #[error("empty sample list")]
    EmptySamples,
    #[error("samples do not share the transmitter-side estimate")]
    EstimateMismatch,
    #[error("transmit power {used} exceeds budget {budget}")]
    PowerExceeded { used: f64, budget: f64 },
    #[error("invalid common-rate split: {0}")]
    Split(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(ModelError::Dimension { what, expected, found })
    }
}

/// Log base 2 of `1 + x`.
pub fn log2_1p<T: Scalar>(x: T) -> T {
    x.ln_1p() / T::LN_2()
}

/// True channel, transmitter-side estimate and estimation error of one fading block.
///
/// `true_channels[k] = sqrt(1 - error_std^2) * estimate[k] + error_std * error[k]`
/// for every set produced by [`ChannelSet::compose`] or the CSIT generator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSet<T: Scalar = f64> {
    num_tx_antennas: usize,
    num_users: usize,
    true_channels: Vec<Vec<Cx<T>>>,
    estimate: Vec<Vec<Cx<T>>>,
    error: Vec<Vec<Cx<T>>>,
    error_std: T,
    noise_vars: Vec<T>,
}

impl<T: Scalar> ChannelSet<T> {
    /// Builds a block from an estimate and error realization.
    pub fn compose(estimate: Vec<Vec<Cx<T>>>, error: Vec<Vec<Cx<T>>>, error_std: T, noise_vars: Vec<T>) -> Result<Self> {
        if !(error_std >= T::zero() && error_std <= T::one()) {
            return Err(ModelError::Parameter(format!("error std {error_std} outside [0, 1]")));
        }
        let num_users = estimate.len();
        if num_users == 0 {
            return Err(ModelError::Parameter("no users".into()));
        }
        let m = estimate[0].len();
        if m == 0 {
            return Err(ModelError::Parameter("no transmit antennas".into()));
        }
        check_len("error users", num_users, error.len())?;
        check_len("noise variances", num_users, noise_vars.len())?;
        for (h, e) in estimate.iter().zip(&error) {
            check_len("estimate antennas", m, h.len())?;
            check_len("error antennas", m, e.len())?;
        }
        if let Some(v) = noise_vars.iter().find(|v| !(**v > T::zero())) {
            return Err(ModelError::Parameter(format!("noise variance {v} must be positive")));
        }
        let known = (T::one() - error_std * error_std).sqrt();
        let true_channels = estimate.iter().zip(&error).map(|(h, e)| h.iter().zip(e).map(|(a, b)| *a * known + *b * error_std).collect()).collect();
        Ok(Self { num_tx_antennas: m, num_users, true_channels, estimate, error, error_std, noise_vars })
    }

    /// Perfect-CSIT block: the estimate equals the true channel.
    pub fn perfect(channels: Vec<Vec<Cx<T>>>, noise_vars: Vec<T>) -> Result<Self> {
        let zero = channels.iter().map(|h| vec![Cx::new(T::zero(), T::zero()); h.len()]).collect();
        Self::compose(channels, zero, T::zero(), noise_vars)
    }

    /// Perfect-CSIT block with unit noise variance for every user.
    pub fn perfect_unit_noise(channels: Vec<Vec<Cx<T>>>) -> Result<Self> {
        let k = channels.len();
        Self::perfect(channels, vec![T::one(); k])
    }

    /// Same estimate, different error draw.
    pub fn with_error(&self, error: Vec<Vec<Cx<T>>>) -> Result<Self> {
        Self::compose(self.estimate.clone(), error, self.error_std, self.noise_vars.clone())
    }

    pub fn num_tx_antennas(&self) -> usize {
        self.num_tx_antennas
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn true_channels(&self) -> &[Vec<Cx<T>>] {
        &self.true_channels
    }

    pub fn channel(&self, user: usize) -> &[Cx<T>] {
        &self.true_channels[user]
    }

    pub fn estimate(&self) -> &[Vec<Cx<T>>] {
        &self.estimate
    }

    pub fn error(&self) -> &[Vec<Cx<T>>] {
        &self.error
    }

    pub fn error_std(&self) -> T {
        self.error_std
    }

    pub fn noise_vars(&self) -> &[T] {
        &self.noise_vars
    }

    /// The transmitter's view: a perfect-CSIT block whose channel is the estimate.
    pub fn estimate_as_perfect(&self) -> Result<Self> {
        Self::perfect(self.estimate.clone(), self.noise_vars.clone())
    }

    fn check_user(&self, user: usize) -> Result<()> {
        if user < self.num_users {
            Ok(())
        } else {
            Err(ModelError::UserIndex { index: user, users: self.num_users })
        }
    }
}

/// Common precoder, private precoders and the split of the common rate among users.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecoderSet<T: Scalar = f64> {
    common: Vec<Cx<T>>,
    privates: Vec<Vec<Cx<T>>>,
    common_split: Vec<T>,
    power_budget: T,
}

fn tolerance<T: Scalar>(base: f64) -> T {
    T::of(base).max(T::epsilon() * T::of(64.0))
}

impl<T: Scalar> PrecoderSet<T> {
    /// Validated constructor.
    ///
    /// `common_split` must be nonnegative and sum to one; the all-zero split is accepted
    /// only together with an all-zero common precoder (no common stream).
    pub fn new(common: Vec<Cx<T>>, privates: Vec<Vec<Cx<T>>>, common_split: Vec<T>, power_budget: T) -> Result<Self> {
        if !(power_budget > T::zero()) {
            return Err(ModelError::Parameter(format!("power budget {power_budget} must be positive")));
        }
        let m = common.len();
        if m == 0 || privates.is_empty() {
            return Err(ModelError::Parameter("empty precoder set".into()));
        }
        for p in &privates {
            check_len("private precoder", m, p.len())?;
        }
        check_len("common split", privates.len(), common_split.len())?;
        if common_split.iter().any(|s| !(*s >= T::zero())) {
            return Err(ModelError::Split("entries must be nonnegative".into()));
        }
        let total: T = common_split.iter().copied().sum();
        let common_power = norm_sqr(&common);
        let no_common = common_power.is_zero() && total.is_zero();
        if !no_common && (total - T::one()).abs() > tolerance(1e-12) {
            return Err(ModelError::Split(format!("fractions sum to {total}, expected 1")));
        }
        let set = Self { common, privates, common_split, power_budget };
        let used = set.total_power();
        if used > power_budget * (T::one() + tolerance(1e-9)) {
            return Err(ModelError::PowerExceeded { used: used.to_f64_lossy(), budget: power_budget.to_f64_lossy() });
        }
        Ok(set)
    }

    /// Private-only precoders (SDMA): zero common precoder, all-zero split.
    pub fn without_common(privates: Vec<Vec<Cx<T>>>, power_budget: T) -> Result<Self> {
        let m = privates.first().map_or(0, Vec::len);
        let k = privates.len();
        Self::new(vec![Cx::new(T::zero(), T::zero()); m], privates, vec![T::zero(); k], power_budget)
    }

    pub fn common(&self) -> &[Cx<T>] {
        &self.common
    }

    pub fn privates(&self) -> &[Vec<Cx<T>>] {
        &self.privates
    }

    pub fn private(&self, user: usize) -> &[Cx<T>] {
        &self.privates[user]
    }

    pub fn common_split(&self) -> &[T] {
        &self.common_split
    }

    pub fn power_budget(&self) -> T {
        self.power_budget
    }

    pub fn num_users(&self) -> usize {
        self.privates.len()
    }

    pub fn num_tx_antennas(&self) -> usize {
        self.common.len()
    }

    pub fn total_power(&self) -> T {
        norm_sqr(&self.common) + self.privates.iter().map(|p| norm_sqr(p)).sum::<T>()
    }

    pub fn has_common(&self) -> bool {
        norm_sqr(&self.common) > T::zero()
    }

    /// Replaces the common split; the new fractions go through the same validation.
    pub fn with_split(self, common_split: Vec<T>) -> Result<Self> {
        Self::new(self.common, self.privates, common_split, self.power_budget)
    }

    /// Copy with the common precoder forced to zero and the split cleared.
    pub fn drop_common(&self) -> Self {
        let m = self.common.len();
        Self {
            common: vec![Cx::new(T::zero(), T::zero()); m],
            privates: self.privates.clone(),
            common_split: vec![T::zero(); self.privates.len()],
            power_budget: self.power_budget,
        }
    }

    fn check_against(&self, channel: &ChannelSet<T>) -> Result<()> {
        check_len("precoder antennas", channel.num_tx_antennas, self.common.len())?;
        check_len("precoder users", channel.num_users, self.privates.len())
    }
}

/// How the rates in a report were obtained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Averaging {
    /// One channel realization.
    Instantaneous,
    /// Mean of per-sample `log2(1 + sinr)` terms over `samples` realizations, taken
    /// before the minimum that defines the common rate (expectation of rate).
    ExpectationOfRate { samples: usize },
}

/// Which stream semantics the report fields carry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Semantics {
    RateSplitting,
    /// Two-user NOMA: `rate_common` is the rate of the first-decoded stream, which
    /// belongs entirely to `decoding_order[0]`.
    Noma {
        decoding_order: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportMeta {
    pub averaging: Averaging,
    pub semantics: Semantics,
}

/// Per-user SINRs and rates (bps/Hz).
///
/// For sample-averaged reports the SINR fields hold the rate-equivalent SINR
/// `2^rate - 1` of the averaged rate terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport<T: Scalar = f64> {
    pub sinr_common: Vec<T>,
    pub sinr_private: Vec<T>,
    pub rate_common: T,
    pub common_portions: Vec<T>,
    pub rate_private: Vec<T>,
    pub rate_total: Vec<T>,
    pub meta: ReportMeta,
}

impl<T: Scalar> RateReport<T> {
    pub fn sum_rate(&self) -> T {
        self.rate_total.iter().copied().sum()
    }

    /// Per-user common-stream rates `log2(1 + sinr_common[k])`.
    pub fn common_stream_rates(&self) -> Vec<T> {
        self.sinr_common.iter().map(|g| log2_1p(*g)).collect()
    }

    /// Assembles a report from per-user common and private rate terms.
    pub(crate) fn from_rate_terms(common_terms: Vec<T>, private_terms: Vec<T>, split: &[T], meta: ReportMeta) -> Self {
        let rate_common = common_terms.iter().copied().fold(T::infinity(), T::min);
        let rate_common = if rate_common.is_finite() { rate_common.max(T::zero()) } else { T::zero() };
        let common_portions: Vec<T> = split.iter().map(|s| *s * rate_common).collect();
        let rate_total = common_portions.iter().zip(&private_terms).map(|(c, r)| *c + *r).collect();
        let to_sinr = |r: &T| T::of(2.0).powf(*r) - T::one();
        Self {
            sinr_common: common_terms.iter().map(to_sinr).collect(),
            sinr_private: private_terms.iter().map(to_sinr).collect(),
            rate_common,
            common_portions,
            rate_private: private_terms,
            rate_total,
            meta,
        }
    }
}

/// `x = p_c s_c + sum_k p_k s_k` for symbols ordered `[s_c, s_1, ..., s_K]`.
pub fn transmit_signal<T: Scalar>(precoders: &PrecoderSet<T>, symbols: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
    check_len("stream symbols", precoders.num_users() + 1, symbols.len())?;
    let mut x: Vec<Cx<T>> = precoders.common.iter().map(|p| *p * symbols[0]).collect();
    for (p, s) in precoders.privates.iter().zip(&symbols[1..]) {
        for (xi, pi) in x.iter_mut().zip(p) {
            *xi = *xi + *pi * *s;
        }
    }
    Ok(x)
}

/// `y_k = h_k^H x + n_k` using the true channel.
pub fn received_sample<T: Scalar>(channel: &ChannelSet<T>, user: usize, x: &[Cx<T>], noise: Cx<T>) -> Result<Cx<T>> {
    channel.check_user(user)?;
    check_len("transmit vector", channel.num_tx_antennas, x.len())?;
    Ok(inner(channel.channel(user), x) + noise)
}

/// `|h^H p_c|^2` followed by `|h^H p_i|^2` for every private stream.
pub(crate) fn stream_gains<T: Scalar>(h: &[Cx<T>], precoders: &PrecoderSet<T>) -> (T, Vec<T>) {
    let common = inner(h, &precoders.common).norm_sqr();
    let privates = precoders.privates.iter().map(|p| inner(h, p).norm_sqr()).collect();
    (common, privates)
}

fn common_from_gains<T: Scalar>(common: T, privates: &[T], noise: T) -> T {
    let denom: T = privates.iter().copied().sum::<T>() + noise;
    common / denom
}

fn private_from_gains<T: Scalar>(user: usize, privates: &[T], noise: T) -> T {
    let interference: T = privates.iter().enumerate().filter(|(i, _)| *i != user).map(|(_, g)| *g).sum();
    privates[user] / (interference + noise)
}

/// Common-stream SINR at `user`: `|h^H p_c|^2 / (sum_i |h^H p_i|^2 + sigma^2)`; the sum
/// includes the user's own private stream.
pub fn sinr_common<T: Scalar>(channel: &ChannelSet<T>, precoders: &PrecoderSet<T>, user: usize) -> Result<T> {
    channel.check_user(user)?;
    precoders.check_against(channel)?;
    let (c, p) = stream_gains(channel.channel(user), precoders);
    Ok(common_from_gains(c, &p, channel.noise_vars[user]))
}

/// Private-stream SINR after ideal removal of the common stream.
pub fn sinr_private<T: Scalar>(channel: &ChannelSet<T>, precoders: &PrecoderSet<T>, user: usize) -> Result<T> {
    channel.check_user(user)?;
    precoders.check_against(channel)?;
    let (_, p) = stream_gains(channel.channel(user), precoders);
    Ok(private_from_gains(user, &p, channel.noise_vars[user]))
}

/// Per-user `(log2(1 + sinr_common), log2(1 + sinr_private))` on one realization.
pub(crate) fn rate_terms<T: Scalar>(channel: &ChannelSet<T>, precoders: &PrecoderSet<T>) -> (Vec<T>, Vec<T>) {
    (0..channel.num_users)
        .map(|k| {
            let (c, p) = stream_gains(channel.channel(k), precoders);
            let noise = channel.noise_vars[k];
            (log2_1p(common_from_gains(c, &p, noise)), log2_1p(private_from_gains(k, &p, noise)))
        })
        .unzip()
}

/// Full rate accounting on the true channels of one block.
pub fn rate_report<T: Scalar>(channel: &ChannelSet<T>, precoders: &PrecoderSet<T>) -> Result<RateReport<T>> {
    precoders.check_against(channel)?;
    let sinr_common: Vec<T> = (0..channel.num_users).map(|k| sinr_common(channel, precoders, k)).collect::<Result<_>>()?;
    let sinr_private: Vec<T> = (0..channel.num_users).map(|k| sinr_private(channel, precoders, k)).collect::<Result<_>>()?;
    let rate_common = sinr_common.iter().map(|g| log2_1p(*g)).fold(T::infinity(), T::min);
    let common_portions: Vec<T> = precoders.common_split.iter().map(|s| *s * rate_common).collect();
    let rate_private: Vec<T> = sinr_private.iter().map(|g| log2_1p(*g)).collect();
    let rate_total = common_portions.iter().zip(&rate_private).map(|(c, r)| *c + *r).collect();
    Ok(RateReport {
        sinr_common,
        sinr_private,
        rate_common,
        common_portions,
        rate_private,
        rate_total,
        meta: ReportMeta { averaging: Averaging::Instantaneous, semantics: Semantics::RateSplitting },
    })
}

/// Checks that every sample shares the estimate of the first one.
pub(crate) fn check_samples<T: Scalar>(samples: &[ChannelSet<T>]) -> Result<&ChannelSet<T>> {
    let first = samples.first().ok_or(ModelError::EmptySamples)?;
    if samples.iter().any(|s| s.estimate != first.estimate || s.noise_vars != first.noise_vars) {
        return Err(ModelError::EstimateMismatch);
    }
    Ok(first)
}

/// Per-user mean common and private rate terms over the samples.
pub(crate) fn mean_rate_terms<T: Scalar>(samples: &[ChannelSet<T>], precoders: &PrecoderSet<T>) -> (Vec<T>, Vec<T>) {
    let k = precoders.num_users();
    let mut common = vec![T::zero(); k];
    let mut private = vec![T::zero(); k];
    for s in samples {
        let (c, p) = rate_terms(s, precoders);
        for u in 0..k {
            common[u] = common[u] + c[u];
            private[u] = private[u] + p[u];
        }
    }
    let n = T::of(samples.len() as f64);
    (common.into_iter().map(|v| v / n).collect(), private.into_iter().map(|v| v / n).collect())
}

/// Sample-average (ergodic) rate accounting: each user's `log2(1 + sinr)` terms are
/// averaged across samples first, then the common rate is the minimum of the averaged
/// common terms.
pub fn averaged_rate_report<T: Scalar>(samples: &[ChannelSet<T>], precoders: &PrecoderSet<T>) -> Result<RateReport<T>> {
    let first = check_samples(samples)?;
    precoders.check_against(first)?;
    if samples.len() == 1 {
        return rate_report(first, precoders);
    }
    let (common, private) = mean_rate_terms(samples, precoders);
    Ok(RateReport::from_rate_terms(
        common,
        private,
        &precoders.common_split,
        ReportMeta { averaging: Averaging::ExpectationOfRate { samples: samples.len() }, semantics: Semantics::RateSplitting },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    fn r(re: f64) -> Cx<f64> {
        c(re, 0.0)
    }

    fn orthogonal() -> (ChannelSet, PrecoderSet) {
        let ch = ChannelSet::perfect_unit_noise(vec![vec![r(1.0), r(0.0)], vec![r(0.0), r(1.0)]]).unwrap();
        let pre = PrecoderSet::new(vec![r(2f64.sqrt()), r(0.0)], vec![vec![r(1.0), r(0.0)], vec![r(0.0), r(1.0)]], vec![0.5, 0.5], 4.0).unwrap();
        (ch, pre)
    }

    #[test]
    fn transmit_signal_examples() {
        let zero = vec![r(0.0), r(0.0)];
        let p = PrecoderSet::new(zero.clone(), vec![vec![r(1.0), r(0.0)], vec![r(0.0), r(1.0)]], vec![0.0, 0.0], 2.0).unwrap();
        assert_eq!(transmit_signal(&p, &[r(0.7), r(1.0), r(-1.0)]).unwrap(), vec![r(1.0), r(-1.0)]);

        let p = PrecoderSet::new(vec![r(1.0), r(1.0)], vec![zero.clone(), zero.clone()], vec![1.0, 0.0], 2.0).unwrap();
        assert_eq!(transmit_signal(&p, &[r(2.0), r(0.0), r(0.0)]).unwrap(), vec![r(2.0), r(2.0)]);

        let p = PrecoderSet::new(vec![r(1.0), r(0.0)], vec![vec![r(0.0), r(1.0)], vec![r(1.0), r(0.0)]], vec![0.5, 0.5], 3.0).unwrap();
        assert_eq!(transmit_signal(&p, &[r(1.0), r(1.0), r(1.0)]).unwrap(), vec![r(2.0), r(1.0)]);
    }

    #[test]
    fn transmit_signal_length_mismatch_names_lengths() {
        let (_, p) = orthogonal();
        let err = transmit_signal(&p, &[r(1.0), r(1.0)]).unwrap_err();
        assert_eq!(err, ModelError::Dimension { what: "stream symbols", expected: 3, found: 2 });
    }

    #[test]
    fn received_sample_examples() {
        let ch = ChannelSet::perfect_unit_noise(vec![vec![r(1.0), r(0.0)], vec![c(0.0, 0.0), c(0.0, 1.0)]]).unwrap();
        assert_eq!(received_sample(&ch, 0, &[r(3.0), r(5.0)], r(0.0)).unwrap(), r(3.0));
        assert_eq!(received_sample(&ch, 1, &[r(1.0), r(1.0)], r(0.0)).unwrap(), c(0.0, -1.0));
        assert_eq!(received_sample(&ch, 0, &[r(0.0), r(0.0)], r(0.5)).unwrap(), r(0.5));
        assert_eq!(received_sample(&ch, 2, &[r(0.0), r(0.0)], r(0.5)).unwrap_err(), ModelError::UserIndex { index: 2, users: 2 });
    }

    #[test]
    fn sinr_examples_orthogonal() {
        let (ch, pre) = orthogonal();
        assert_relative_eq!(sinr_common(&ch, &pre, 0).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(sinr_common(&ch, &pre, 1).unwrap(), 0.0);
        let zero_common = pre.drop_common();
        assert_eq!(sinr_common(&ch, &zero_common, 0).unwrap(), 0.0);
        assert_eq!(sinr_common(&ch, &zero_common, 1).unwrap(), 0.0);
    }

    #[test]
    fn sinr_private_zero_forcing_geometry() {
        let p_total = 10.0f64;
        let ch = ChannelSet::perfect_unit_noise(vec![vec![r(1.0), r(0.0)], vec![r(0.0), r(1.0)]]).unwrap();
        let pre = PrecoderSet::without_common(vec![vec![r(p_total.sqrt()), r(0.0)], vec![r(0.0), r(p_total.sqrt())]], 2.0 * p_total).unwrap();
        assert_relative_eq!(sinr_private(&ch, &pre, 0).unwrap(), p_total, epsilon = 1e-12);
        let muted = PrecoderSet::without_common(vec![vec![r(0.0), r(0.0)], vec![r(0.0), r(1.0)]], 1.0).unwrap();
        assert_eq!(sinr_private(&ch, &muted, 0).unwrap(), 0.0);
    }

    #[test]
    fn report_with_zero_sinr_user_has_zero_common_rate() {
        let (ch, pre) = orthogonal();
        let rep = rate_report(&ch, &pre).unwrap();
        assert_eq!(rep.rate_common, 0.0);
        assert_eq!(rep.common_portions, vec![0.0, 0.0]);
        assert_eq!(rep.rate_total, rep.rate_private);
        assert_relative_eq!(rep.rate_private[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn single_user_matched_filter_rate() {
        let h = vec![c(0.3, -1.1), c(0.7, 0.2)];
        let p = 5.0;
        let ch = ChannelSet::perfect_unit_noise(vec![h.clone()]).unwrap();
        let pre = PrecoderSet::without_common(vec![crate::linalg::with_power(&h, p)], p).unwrap();
        let rep = rate_report(&ch, &pre).unwrap();
        let expected = (1.0 + p * norm_sqr(&h)).log2();
        assert_relative_eq!(rep.rate_total[0], expected, epsilon = 1e-12);
    }

    #[test]
    fn split_validation() {
        let z = vec![r(0.0), r(0.0)];
        let e = PrecoderSet::new(vec![r(1.0), r(0.0)], vec![z.clone(), z.clone()], vec![0.5, 0.4], 1.0).unwrap_err();
        assert!(matches!(e, ModelError::Split(_)));
        let e = PrecoderSet::new(vec![r(1.0), r(0.0)], vec![z.clone(), z.clone()], vec![0.0, 0.0], 1.0).unwrap_err();
        assert!(matches!(e, ModelError::Split(_)));
        let e = PrecoderSet::new(vec![r(1.0), r(0.0)], vec![z.clone(), z.clone()], vec![-0.5, 1.5], 1.0).unwrap_err();
        assert!(matches!(e, ModelError::Split(_)));
        assert!(PrecoderSet::new(z.clone(), vec![z.clone(), z], vec![0.0, 0.0], 1.0).is_ok());
    }

    #[test]
    fn power_budget_is_enforced() {
        let e = PrecoderSet::without_common(vec![vec![r(1.0), r(1.0)]], 1.5).unwrap_err();
        assert!(matches!(e, ModelError::PowerExceeded { .. }));
        assert!(PrecoderSet::without_common(vec![vec![r(1.0), r(1.0)]], 2.0 * (1.0 + 1e-10)).is_ok());
    }

    #[test]
    fn compose_rejects_bad_error_std() {
        let h = vec![vec![r(1.0)]];
        assert!(ChannelSet::compose(h.clone(), h.clone(), 1.5, vec![1.0]).is_err());
        assert!(ChannelSet::compose(h.clone(), h, -0.1, vec![1.0]).is_err());
    }

    #[test]
    fn averaged_report_rejects_empty_and_mismatch() {
        let (ch, pre) = orthogonal();
        assert_eq!(averaged_rate_report::<f64>(&[], &pre).unwrap_err(), ModelError::EmptySamples);
        let other = ChannelSet::perfect_unit_noise(vec![vec![r(2.0), r(0.0)], vec![r(0.0), r(1.0)]]).unwrap();
        assert_eq!(averaged_rate_report(&[ch, other], &pre).unwrap_err(), ModelError::EstimateMismatch);
    }

    #[test]
    fn f32_instantiation_matches_f64() {
        let ch = ChannelSet::<f32>::perfect_unit_noise(vec![vec![Cx::new(1.0, 0.0), Cx::new(0.0, 0.0)], vec![Cx::new(0.0, 0.0), Cx::new(1.0, 0.0)]]).unwrap();
        let pre = PrecoderSet::<f32>::new(
            vec![Cx::new(2f32.sqrt(), 0.0), Cx::new(0.0, 0.0)],
            vec![vec![Cx::new(1.0, 0.0), Cx::new(0.0, 0.0)], vec![Cx::new(0.0, 0.0), Cx::new(1.0, 0.0)]],
            vec![0.5, 0.5],
            4.0,
        )
        .unwrap();
        let rep = rate_report(&ch, &pre).unwrap();
        assert!((rep.sinr_common[0] - 1.0).abs() < 1e-6);
    }
}
