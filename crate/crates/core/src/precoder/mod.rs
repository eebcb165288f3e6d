//! Sum-rate precoder optimization for RSMA, SDMA and two-user NOMA.
//!
//! The objective is the sample-average sum rate over conditional channel draws that
//! share the transmitter's estimate. It is maximized by minorize-maximize iterations:
//! every rate term is bounded below by its rate-MMSE quadratic minorizer at the current
//! point, and the resulting concave subproblem is solved exactly (see
//! `subproblem`). Because each accepted step increases the minorizer, the true
//! objective is nondecreasing across iterations.
//!
//! A per-user rate floor is enforced with an exact l1 penalty whose weight grows
//! geometrically until the floor is met (or a penalty cap is reached, in which case the
//! instance is reported infeasible).
//!
//! SDMA and NOMA are the same problem with some streams frozen at zero, so restricted
//! solutions can be fed to the RSMA run as extra starting points.

mod noma;
mod subproblem;
mod surrogate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use num_traits::{One, Zero};

use crate::linalg::{inner, norm_sqr, solve, with_power, Hermitian};
use crate::model::{averaged_rate_report, check_samples, log2_1p, ChannelSet, ModelError, PrecoderSet, RateReport};
use crate::scalar::{Cx, Scalar};

pub use noma::{averaged_noma_rates, decoding_order_from_estimate, noma_precoders, noma_rates};

use subproblem::{lower_envelope, pieces, Subproblem};
use surrogate::{true_terms, Layout, Streams, Surrogate};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid optimizer settings: {0}")]
    Settings(String),
}

/// Transmission strategy family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Rsma,
    Sdma,
    Noma,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [StrategyKind::Rsma, StrategyKind::Sdma, StrategyKind::Noma];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Rsma => "rsma",
            StrategyKind::Sdma => "sdma",
            StrategyKind::Noma => "noma",
        }
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rsma" | "rs" => Ok(StrategyKind::Rsma),
            "sdma" | "mu-lp" | "mulp" => Ok(StrategyKind::Sdma),
            "noma" => Ok(StrategyKind::Noma),
            other => Err(format!("unknown strategy '{other}' (expected rsma, sdma or noma)")),
        }
    }
}

/// Strategy with its decoding order where one applies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    Rsma,
    Sdma,
    /// `decoding_order[0]` is decoded first by both users; only defined for two users.
    Noma {
        decoding_order: Vec<usize>,
    },
}

impl Strategy {
    pub fn kind(&self) -> StrategyKind {
        match self {
            Strategy::Rsma => StrategyKind::Rsma,
            Strategy::Sdma => StrategyKind::Sdma,
            Strategy::Noma { .. } => StrategyKind::Noma,
        }
    }

    /// Strategy of `kind`, with the NOMA order taken from the estimate.
    pub fn for_estimate<T: Scalar>(kind: StrategyKind, estimate: &[Vec<Cx<T>>]) -> Self {
        match kind {
            StrategyKind::Rsma => Strategy::Rsma,
            StrategyKind::Sdma => Strategy::Sdma,
            StrategyKind::Noma => Strategy::Noma { decoding_order: decoding_order_from_estimate(estimate) },
        }
    }

    fn layout(&self, users: usize) -> Result<Layout, ModelError> {
        Ok(match self {
            Strategy::Rsma => Layout { common_active: true, private_active: vec![true; users], recipients: vec![true; users] },
            Strategy::Sdma => Layout { common_active: false, private_active: vec![true; users], recipients: vec![false; users] },
            Strategy::Noma { decoding_order } => {
                noma::check_order(decoding_order, users)?;
                let mut private_active = vec![true; users];
                private_active[decoding_order[0]] = false;
                let mut recipients = vec![false; users];
                recipients[decoding_order[0]] = true;
                Layout { common_active: true, private_active, recipients }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    /// Minorize-maximize iterations per penalty stage.
    pub max_outer_iterations: usize,
    /// Stop when the relative objective gain of an iteration falls below this.
    pub convergence_tol: f64,
    /// Per-user rate floor in bps/Hz (0 disables the constraint).
    pub qos_floor: f64,
    /// Conditional error draws per estimate used for the sample average.
    pub conditional_samples: usize,
    /// Number of built-in starting points.
    pub restarts: usize,
    /// Multiplier applied to the penalty weight between stages.
    pub penalty_growth: f64,
    pub initial_penalty: f64,
    pub max_penalty: f64,
    /// Largest rate-floor shortfall (bps/Hz) accepted as satisfied.
    pub violation_tol: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            max_outer_iterations: 200,
            convergence_tol: 1e-4,
            qos_floor: 0.0,
            conditional_samples: 64,
            restarts: 3,
            penalty_growth: 5.0,
            initial_penalty: 1.0,
            max_penalty: 1e4,
            violation_tol: 1e-3,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        let bad = |m: &str| Err(OptimizeError::Settings(m.to_string()));
        if self.max_outer_iterations == 0 {
            return bad("max_outer_iterations must be positive");
        }
        if !(self.convergence_tol > 0.0) {
            return bad("convergence_tol must be positive");
        }
        if !(self.qos_floor >= 0.0) || !self.qos_floor.is_finite() {
            return bad("qos_floor must be a finite nonnegative rate");
        }
        if self.restarts == 0 || self.conditional_samples == 0 {
            return bad("restarts and conditional_samples must be positive");
        }
        if !(self.penalty_growth > 1.0) || !(self.initial_penalty > 0.0) || !(self.max_penalty >= self.initial_penalty) {
            return bad("penalty schedule must start positive and grow");
        }
        if !(self.violation_tol > 0.0) {
            return bad("violation_tol must be positive");
        }
        Ok(())
    }
}

/// Objective values of one penalty stage, first entry at the stage's starting point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStage {
    pub penalty: f64,
    pub objective: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum QosOutcome {
    NotRequested,
    Satisfied,
    /// `certified` means even single-user full-power transmission misses the floor for
    /// some user; otherwise the penalty cap was reached with `shortfall` remaining.
    Infeasible {
        certified: bool,
        shortfall: f64,
    },
}

impl QosOutcome {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, QosOutcome::Infeasible { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimized<T: Scalar = f64> {
    pub strategy: Strategy,
    pub precoders: PrecoderSet<T>,
    /// Sample-average report on the optimization samples.
    pub report: RateReport<T>,
    pub sum_rate: T,
    pub qos: QosOutcome,
    /// Trace of the selected start.
    pub trace: Vec<TraceStage>,
    pub starts: usize,
    pub selected_start: usize,
}

/// Sample-average sum rate of `precoders` (the optimizer's objective without penalty).
pub fn sum_rate_objective<T: Scalar>(samples: &[ChannelSet<T>], precoders: &PrecoderSet<T>) -> Result<T, ModelError> {
    Ok(averaged_rate_report(samples, precoders)?.sum_rate())
}

struct Problem<'a, T: Scalar> {
    samples: &'a [ChannelSet<T>],
    layout: Layout,
    power: T,
    qos: T,
    settings: &'a OptimizerSettings,
    /// Unit directions used to restart private streams that collapsed to zero.
    revival: Vec<Vec<Cx<T>>>,
    common_revival: Vec<Cx<T>>,
}

struct Run<T: Scalar> {
    streams: Streams<T>,
    trace: Vec<TraceStage>,
    sum_rate: T,
    violation: T,
}

impl<'a, T: Scalar> Problem<'a, T> {
    fn sum_and_violation(&self, streams: &Streams<T>) -> (T, T) {
        let (c, p) = true_terms(self.samples, streams);
        let sum = lower_envelope(&pieces(&self.layout, T::zero(), T::zero()), &c, &p);
        if self.qos <= T::zero() {
            return (sum, T::zero());
        }
        let penalized = lower_envelope(&pieces(&self.layout, self.qos, T::one()), &c, &p);
        (sum, (sum - penalized).max(T::zero()))
    }

    /// A zero stream is a fixed point of the MM update, so a user whose private stream
    /// collapsed under a weak penalty (or a common stream that was never switched on) can
    /// not help meet the floor later. Such streams get a small share of power along their
    /// revival direction; the unchanged point competes with the revived ones under the
    /// next stage's objective.
    fn revive(&self, streams: Streams<T>, rho: T) -> Streams<T> {
        let dead = |v: &[Cx<T>]| norm_sqr(v) < T::of(1e-4) * self.power;
        let starving: Vec<usize> = (0..self.layout.users()).filter(|u| self.layout.private_active[*u] && dead(&streams.privates[*u])).collect();
        let common_off = self.layout.common_active && dead(&streams.common);
        if starving.is_empty() && !common_off {
            return streams;
        }
        let stage_pieces = pieces(&self.layout, self.qos, rho);
        let objective = |s: &Streams<T>| {
            let (c, p) = true_terms(self.samples, s);
            lower_envelope(&stage_pieces, &c, &p)
        };
        let mut best_value = objective(&streams);
        let mut best = streams.clone();
        let mut consider = |s: Streams<T>| {
            let value = objective(&s);
            if value > best_value {
                best_value = value;
                best = s;
            }
        };
        for fraction in [0.02, 0.1, 0.3] {
            let share = T::of(fraction) * self.power;
            if !starving.is_empty() {
                let each = share / T::of(starving.len() as f64);
                let mut s = streams.clone();
                for u in &starving {
                    s.privates[*u] = vec![Cx::zero(); s.privates[*u].len()];
                }
                s.scale_to(self.power - share);
                for u in &starving {
                    s.privates[*u] = with_power(&self.revival[*u], each);
                }
                consider(s);
            }
            if common_off {
                let mut s = streams.clone();
                s.common = vec![Cx::zero(); s.common.len()];
                s.scale_to(self.power - share);
                s.common = with_power(&self.common_revival, share);
                consider(s);
            }
        }
        best
    }

    fn run(&self, start: Streams<T>) -> Run<T> {
        let with_qos = self.qos > T::zero();
        let mut rho = if with_qos { T::of(self.settings.initial_penalty) } else { T::zero() };
        let mut streams = start;
        let mut trace = Vec::new();
        loop {
            let stage_pieces = pieces(&self.layout, self.qos, rho);
            let objective = |s: &Streams<T>| {
                let (c, p) = true_terms(self.samples, s);
                lower_envelope(&stage_pieces, &c, &p)
            };
            let mut value = objective(&streams);
            let mut values = vec![value.to_f64_lossy()];
            for _ in 0..self.settings.max_outer_iterations {
                let sur = Surrogate::build(self.samples, &streams);
                let (c0, p0) = sur.values(&streams);
                let here = lower_envelope(&stage_pieces, &c0, &p0);
                let next = Subproblem::new(&sur, &self.layout, &stage_pieces, self.power).solve(&streams);
                let (c1, p1) = sur.values(&next);
                if !(lower_envelope(&stage_pieces, &c1, &p1) > here) {
                    break;
                }
                let next_value = objective(&next);
                // The minorizer guarantees ascent; a decrease can only come from rounding.
                if !(next_value >= value) {
                    break;
                }
                let gain = (next_value - value) / value.abs().max(T::one());
                streams = next;
                value = next_value;
                values.push(value.to_f64_lossy());
                if gain < T::of(self.settings.convergence_tol) {
                    break;
                }
            }
            trace.push(TraceStage { penalty: rho.to_f64_lossy(), objective: values });
            let (_, violation) = self.sum_and_violation(&streams);
            if !with_qos || violation <= T::of(self.settings.violation_tol) || rho >= T::of(self.settings.max_penalty) {
                break;
            }
            rho = (rho * T::of(self.settings.penalty_growth)).min(T::of(self.settings.max_penalty));
            streams = self.revive(streams, rho);
        }
        let (sum_rate, violation) = self.sum_and_violation(&streams);
        Run { streams, trace, sum_rate, violation }
    }
}

fn matched_filters<T: Scalar>(estimate: &[Vec<Cx<T>>]) -> Vec<Vec<Cx<T>>> {
    estimate.iter().map(|h| with_power(h, T::one())).collect()
}

fn dominant_direction<T: Scalar>(estimate: &[Vec<Cx<T>>]) -> Vec<Cx<T>> {
    let mut gram = Hermitian::zeros(estimate[0].len());
    for h in estimate {
        gram.add_outer(T::one(), h);
    }
    gram.eigen().dominant().to_vec()
}

/// Regularized zero-forcing directions (unit norm) for the `active` users, falling
/// back to matched filters when the regularized Gram matrix is singular.
fn rzf_directions<T: Scalar>(estimate: &[Vec<Cx<T>>], active: &[usize], regularization: T) -> Vec<Vec<Cx<T>>> {
    let mf = matched_filters(estimate);
    let n = active.len();
    let gram: Vec<Vec<Cx<T>>> = active
        .iter()
        .enumerate()
        .map(|(r, u)| {
            active
                .iter()
                .enumerate()
                .map(|(c, v)| inner(&estimate[*u], &estimate[*v]) + if r == c { Cx::new(regularization, T::zero()) } else { Cx::zero() })
                .collect()
        })
        .collect();
    let mut out = mf.clone();
    for (col, user) in active.iter().enumerate() {
        let mut e = vec![Cx::zero(); n];
        e[col] = Cx::one();
        if let Some(x) = solve(gram.clone(), e) {
            let mut w = vec![Cx::zero(); estimate[0].len()];
            for (row, u) in active.iter().enumerate() {
                for (wi, hi) in w.iter_mut().zip(&estimate[*u]) {
                    *wi = *wi + *hi * x[row];
                }
            }
            let w = with_power(&w, T::one());
            if norm_sqr(&w) > T::zero() {
                out[*user] = w;
            }
        }
    }
    out
}

/// Built-in starting points for `layout`, most promising first.
///
/// Common-stream layouts start from a common precoder along the dominant direction of
/// the estimate with private streams (regularized zero-forcing or matched filter) sharing
/// the remaining power. The first start gives the private streams about `1 / error_var`
/// power, the level at which their residual interference reaches the noise floor.
fn initial_points<T: Scalar>(channel: &ChannelSet<T>, layout: &Layout, power: T, count: usize) -> Vec<Streams<T>> {
    let estimate = channel.estimate();
    let k = estimate.len();
    let m = estimate[0].len();
    let active: Vec<usize> = (0..k).filter(|u| layout.private_active[*u]).collect();
    let noise = channel.noise_vars().iter().copied().sum::<T>() / T::of(k as f64);
    let mf = matched_filters(estimate);
    let rzf = rzf_directions(estimate, &active, T::of(active.len().max(1) as f64) * noise / power);
    let dominant = dominant_direction(estimate);
    let share = |common_fraction: T, dirs: &[Vec<Cx<T>>]| {
        let mut s = Streams::zeros(m, k);
        if layout.common_active {
            s.common = with_power(&dominant, common_fraction * power);
        }
        let private_fraction = if layout.common_active { T::one() - common_fraction } else { T::one() };
        if !active.is_empty() {
            let each = private_fraction * power / T::of(active.len() as f64);
            for u in &active {
                s.privates[*u] = with_power(&dirs[*u], each);
            }
        }
        s
    };
    let mut out = Vec::new();
    if layout.common_active {
        let err = channel.error_std() * channel.error_std();
        let matched = if err > T::zero() { (noise / (err * power)).min(T::one()) } else { T::one() };
        let clamp = |f: T| f.max(T::of(0.01)).min(T::of(0.95));
        out.push(share(clamp(T::one() - matched), &rzf));
        out.push(share(T::of(0.5), &mf));
        out.push(share(T::of(0.2), &rzf));
        out.push(share(clamp(T::one() - matched * T::of(4.0)), &rzf));
        out.push(share(T::of(0.05), &mf));
        out.push(share(clamp(T::one() - matched * T::of(0.25)), &rzf));
        out.push(share(T::of(0.8), &mf));
        out.push(share(T::of(0.2), &mf));
    } else {
        // Single-user starts, strongest estimated channel first.
        let mut by_gain = active.clone();
        by_gain.sort_by(|a, b| norm_sqr(&estimate[*b]).partial_cmp(&norm_sqr(&estimate[*a])).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(b)));
        out.push(share(T::zero(), &rzf));
        for u in &by_gain {
            let mut s = Streams::zeros(m, k);
            s.privates[*u] = with_power(&mf[*u], power);
            out.push(s);
        }
        out.push(share(T::zero(), &mf));
    }
    out.truncate(count.max(1));
    out
}

/// Converts a warm start to the working form of `layout`; zero or unusable starts are
/// dropped.
fn warm_point<T: Scalar>(set: &PrecoderSet<T>, layout: &Layout, power: T) -> Option<Streams<T>> {
    if set.num_users() != layout.users() {
        return None;
    }
    let mut s = Streams { common: set.common().to_vec(), privates: set.privates().to_vec() };
    s.restrict(layout);
    let used = s.power();
    if !(used > T::zero()) || !used.is_finite() {
        return None;
    }
    if used > power {
        s.scale_to(power);
    }
    Some(s)
}

/// Splits `rate_common` among `recipients`: shortfalls below `floor` are covered first,
/// largest shortfall first, and the remainder goes to the recipient with the lowest
/// total rate (ties to the lower index). Returns the fractions.
fn split_common<T: Scalar>(rate_common: T, private: &[T], recipients: &[bool], floor: T) -> Vec<T> {
    let k = private.len();
    let mut alloc = vec![T::zero(); k];
    let members: Vec<usize> = (0..k).filter(|u| recipients[*u]).collect();
    if members.is_empty() {
        return alloc;
    }
    let mut remaining = rate_common.max(T::zero());
    let mut by_need = members.clone();
    by_need.sort_by(|a, b| {
        let (na, nb) = (floor - private[*a], floor - private[*b]);
        nb.partial_cmp(&na).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(b))
    });
    for u in by_need {
        let need = (floor - private[u]).max(T::zero()).min(remaining);
        alloc[u] = need;
        remaining = remaining - need;
    }
    let mut target = members[0];
    for u in &members {
        if private[*u] + alloc[*u] < private[target] + alloc[target] {
            target = *u;
        }
    }
    if rate_common > T::zero() {
        // The target takes what is left so the fractions sum to one exactly.
        let mut f: Vec<T> = alloc.iter().map(|a| *a / rate_common).collect();
        f[target] = T::zero();
        let others: T = f.iter().copied().sum();
        f[target] = (T::one() - others).max(T::zero());
        f
    } else {
        let mut f = vec![T::zero(); k];
        f[target] = T::one();
        f
    }
}

/// Certified infeasibility: user `k` cannot reach `floor` even alone at full power.
fn certainly_infeasible<T: Scalar>(samples: &[ChannelSet<T>], power: T, floor: T) -> bool {
    let k = samples[0].num_users();
    (0..k).any(|u| {
        let bound: T = samples.iter().map(|s| log2_1p(power * norm_sqr(s.channel(u)) / s.noise_vars()[u])).sum::<T>() / T::of(samples.len() as f64);
        bound < floor
    })
}

fn finish<T: Scalar>(
    samples: &[ChannelSet<T>],
    strategy: &Strategy,
    layout: &Layout,
    streams: Streams<T>,
    power: T,
    floor: T,
    settings: &OptimizerSettings,
    certified: bool,
) -> Result<(PrecoderSet<T>, RateReport<T>, QosOutcome), OptimizeError> {
    let (c, p) = true_terms(samples, &streams);
    let has_common = norm_sqr(&streams.common) > T::zero();
    let rate_common = if layout.common_counts() { c.iter().copied().fold(T::infinity(), T::min).max(T::zero()) } else { T::zero() };
    let split = if has_common { split_common(rate_common, &p, &layout.recipients, floor) } else { vec![T::zero(); layout.users()] };
    let split = if has_common && split.iter().all(|s| s.is_zero()) {
        let mut s = vec![T::zero(); layout.users()];
        s[0] = T::one();
        s
    } else {
        split
    };
    let precoders = PrecoderSet::new(streams.common, streams.privates, split, power)?;
    let report = match strategy {
        Strategy::Noma { decoding_order } => averaged_noma_rates(samples, &precoders, decoding_order)?,
        _ => averaged_rate_report(samples, &precoders)?,
    };
    let qos = if floor <= T::zero() {
        QosOutcome::NotRequested
    } else {
        let shortfall = report.rate_total.iter().map(|r| (floor - *r).max(T::zero())).fold(T::zero(), T::max).to_f64_lossy();
        if certified {
            QosOutcome::Infeasible { certified: true, shortfall }
        } else if shortfall <= settings.violation_tol {
            QosOutcome::Satisfied
        } else {
            QosOutcome::Infeasible { certified: false, shortfall }
        }
    };
    Ok((precoders, report, qos))
}

/// Optimizes precoders for `strategy` on the conditional samples (all sharing one
/// estimate) under total power `power`.
///
/// For RSMA the SDMA solution (and for two users the NOMA solution) is computed first
/// and used as an extra starting point, so the RSMA objective is never below either.
pub fn optimize<T: Scalar>(samples: &[ChannelSet<T>], strategy: &Strategy, power: T, settings: &OptimizerSettings) -> Result<Optimized<T>, OptimizeError> {
    let base = check_samples(samples)?;
    let mut warm = Vec::new();
    if *strategy == Strategy::Rsma && base.num_users() > 1 {
        warm.push(optimize_with_warm_starts(samples, &Strategy::Sdma, power, settings, &[])?.precoders);
        if base.num_users() == 2 {
            let noma = Strategy::for_estimate(StrategyKind::Noma, base.estimate());
            warm.push(optimize_with_warm_starts(samples, &noma, power, settings, &[])?.precoders);
        }
    }
    optimize_with_warm_starts(samples, strategy, power, settings, &warm)
}

/// [`optimize`] with caller-supplied extra starting points (projected onto the
/// strategy's active streams) and no automatic ones.
pub fn optimize_with_warm_starts<T: Scalar>(
    samples: &[ChannelSet<T>],
    strategy: &Strategy,
    power: T,
    settings: &OptimizerSettings,
    warm_starts: &[PrecoderSet<T>],
) -> Result<Optimized<T>, OptimizeError> {
    optimize_starts(samples, strategy, power, settings, warm_starts, false)
}

/// Like [`optimize_with_warm_starts`] but iterates from `start` alone (the default
/// starting points are used only if `start` is unusable for `strategy`).
pub fn optimize_from<T: Scalar>(
    samples: &[ChannelSet<T>],
    strategy: &Strategy,
    power: T,
    settings: &OptimizerSettings,
    start: &PrecoderSet<T>,
) -> Result<Optimized<T>, OptimizeError> {
    optimize_starts(samples, strategy, power, settings, std::slice::from_ref(start), true)
}

fn optimize_starts<T: Scalar>(
    samples: &[ChannelSet<T>],
    strategy: &Strategy,
    power: T,
    settings: &OptimizerSettings,
    warm_starts: &[PrecoderSet<T>],
    only_warm: bool,
) -> Result<Optimized<T>, OptimizeError> {
    settings.validate()?;
    let base = check_samples(samples)?;
    if !(power > T::zero()) || !power.is_finite() {
        return Err(OptimizeError::Settings(format!("power budget {power} must be positive")));
    }
    let k = base.num_users();
    let m = base.num_tx_antennas();
    let layout = strategy.layout(k)?;
    let requested = T::of(settings.qos_floor);
    let certified = requested > T::zero() && certainly_infeasible(samples, power, requested);
    let floor = if certified { T::zero() } else { requested };

    if k == 1 {
        // Matched filter at full power is optimal for a single user.
        let mut s = Streams::zeros(m, 1);
        s.privates[0] = with_power(&base.estimate()[0], power);
        let (precoders, report, qos) = finish(samples, strategy, &layout, s, power, requested, settings, certified)?;
        return Ok(Optimized {
            strategy: strategy.clone(),
            sum_rate: report.sum_rate(),
            precoders,
            report,
            qos,
            trace: Vec::new(),
            starts: 1,
            selected_start: 0,
        });
    }

    let active: Vec<usize> = (0..k).filter(|u| layout.private_active[*u]).collect();
    let noise = base.noise_vars().iter().copied().sum::<T>() / T::of(k as f64);
    let revival = rzf_directions(base.estimate(), &active, T::of(active.len().max(1) as f64) * noise / power);
    let common_revival = dominant_direction(base.estimate());
    let problem = Problem { samples, layout: layout.clone(), power, qos: floor, settings, revival, common_revival };
    let mut starts = if only_warm { Vec::new() } else { initial_points(base, &layout, power, settings.restarts) };
    starts.extend(warm_starts.iter().filter_map(|w| warm_point(w, &layout, power)));
    if starts.is_empty() {
        starts = initial_points(base, &layout, power, settings.restarts);
    }
    let tol = T::of(settings.violation_tol);
    let mut best: Option<(usize, Run<T>)> = None;
    for (i, start) in starts.iter().enumerate() {
        let run = problem.run(start.clone());
        let better = match &best {
            None => true,
            Some((_, b)) => {
                let (fr, fb) = (run.violation <= tol, b.violation <= tol);
                match (fr, fb) {
                    (true, false) => true,
                    (false, true) => false,
                    (true, true) => run.sum_rate > b.sum_rate,
                    (false, false) => run.violation < b.violation || (run.violation == b.violation && run.sum_rate > b.sum_rate),
                }
            }
        };
        if better {
            best = Some((i, run));
        }
    }
    let (selected_start, run) = best.expect("at least one starting point");
    let (precoders, report, qos) = finish(samples, strategy, &layout, run.streams, power, requested, settings, certified)?;
    Ok(Optimized { strategy: strategy.clone(), sum_rate: report.sum_rate(), precoders, report, qos, trace: run.trace, starts: starts.len(), selected_start })
}
