//! Two-user NOMA with successive interference cancellation.
//!
//! NOMA is carried in the rate-splitting containers as follows. With decoding order
//! `[w, s]` (stream of user `w` decoded first, by both users), the first-decoded stream
//! occupies the common slot of the [`PrecoderSet`], the private precoder of `w` is zero
//! and the common split is one-hot on `w`. The strong user `s` removes `w`'s stream and
//! then decodes its own stream from the private slot. Under this mapping the NOMA rates
//! coincide with the rate-splitting formulas, so [`noma_rates`] and
//! [`crate::model::rate_report`] agree term by term.

use num_traits::Zero;

use crate::linalg::{inner, norm_sqr};
use crate::model::{check_samples, log2_1p, Averaging, ChannelSet, ModelError, PrecoderSet, RateReport, ReportMeta, Semantics};
use crate::scalar::{Cx, Scalar};

/// Decoding order by ascending estimated channel norm: the weakest user's stream is
/// decoded first and the strongest user performs SIC. Ties keep the lower index first.
pub fn decoding_order_from_estimate<T: Scalar>(estimate: &[Vec<Cx<T>>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..estimate.len()).collect();
    order.sort_by(|a, b| norm_sqr(&estimate[*a]).partial_cmp(&norm_sqr(&estimate[*b])).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(b)));
    order
}

pub(crate) fn check_order(order: &[usize], users: usize) -> Result<(), ModelError> {
    if users != 2 {
        return Err(ModelError::Parameter(format!("NOMA is defined for 2 users, got {users}")));
    }
    let mut seen = vec![false; users];
    if order.len() != users || order.iter().any(|u| *u >= users || std::mem::replace(&mut seen[*u], true)) {
        return Err(ModelError::Parameter(format!("decoding order {order:?} is not a permutation of 0..{users}")));
    }
    Ok(())
}

/// Mapped precoder set for NOMA streams `first` (user `order[0]`) and `second`
/// (user `order[1]`).
pub fn noma_precoders<T: Scalar>(first: Vec<Cx<T>>, second: Vec<Cx<T>>, order: &[usize], power_budget: T) -> Result<PrecoderSet<T>, ModelError> {
    check_order(order, 2)?;
    let m = first.len();
    let mut privates = vec![vec![Cx::zero(); m]; 2];
    privates[order[1]] = second;
    let mut split = vec![T::zero(); 2];
    split[order[0]] = T::one();
    PrecoderSet::new(first, privates, split, power_budget)
}

fn check_mapping<T: Scalar>(precoders: &PrecoderSet<T>, order: &[usize]) -> Result<(), ModelError> {
    check_order(order, precoders.num_users())?;
    if norm_sqr(precoders.private(order[0])) > T::zero() {
        return Err(ModelError::Parameter("first-decoded user must have a zero private precoder".into()));
    }
    if precoders.has_common() && precoders.common_split()[order[0]] != T::one() {
        return Err(ModelError::Split("NOMA split must be one-hot on the first-decoded user".into()));
    }
    Ok(())
}

fn noma_terms<T: Scalar>(channel: &ChannelSet<T>, precoders: &PrecoderSet<T>, order: &[usize]) -> ([T; 2], [T; 2]) {
    let s = order[1];
    let first = precoders.common();
    let second = precoders.private(s);
    // SINR of the first-decoded stream at each user, then the second stream at `s`.
    let mut sinr_first = [T::zero(); 2];
    for u in 0..2 {
        let h = channel.channel(u);
        let noise = channel.noise_vars()[u];
        sinr_first[u] = inner(h, first).norm_sqr() / (inner(h, second).norm_sqr() + noise);
    }
    let mut sinr_second = [T::zero(); 2];
    sinr_second[s] = inner(channel.channel(s), second).norm_sqr() / channel.noise_vars()[s];
    (sinr_first, sinr_second)
}

fn report_from_sinrs<T: Scalar>(first: [T; 2], second: [T; 2], order: &[usize], meta: ReportMeta, as_rates: bool) -> RateReport<T> {
    let to_rate = |x: T| if as_rates { x } else { log2_1p(x) };
    let to_sinr = |x: T| if as_rates { T::of(2.0).powf(x) - T::one() } else { x };
    let rate_first = to_rate(first[0]).min(to_rate(first[1])).max(T::zero());
    let mut portions = vec![T::zero(); 2];
    portions[order[0]] = rate_first;
    let rate_private: Vec<T> = second.iter().map(|x| to_rate(*x)).collect();
    let rate_total = portions.iter().zip(&rate_private).map(|(a, b)| *a + *b).collect();
    RateReport {
        sinr_common: first.iter().map(|x| to_sinr(*x)).collect(),
        sinr_private: second.iter().map(|x| to_sinr(*x)).collect(),
        rate_common: rate_first,
        common_portions: portions,
        rate_private,
        rate_total,
        meta,
    }
}

/// Two-user NOMA rates on one realization for precoders in the mapped form.
///
/// `sinr_common[u]` is the SINR of the first-decoded stream at user `u` (the second
/// stream is interference); `sinr_private[order[1]]` is the second stream after SIC and
/// `sinr_private[order[0]] = 0`.
pub fn noma_rates<T: Scalar>(channel: &ChannelSet<T>, precoders: &PrecoderSet<T>, order: &[usize]) -> Result<RateReport<T>, ModelError> {
    check_mapping(precoders, order)?;
    if channel.num_users() != 2 || channel.num_tx_antennas() != precoders.num_tx_antennas() {
        return Err(ModelError::Dimension { what: "NOMA channel", expected: 2, found: channel.num_users() });
    }
    let (first, second) = noma_terms(channel, precoders, order);
    Ok(report_from_sinrs(
        first,
        second,
        order,
        ReportMeta { averaging: Averaging::Instantaneous, semantics: Semantics::Noma { decoding_order: order.to_vec() } },
        false,
    ))
}

/// Sample-average NOMA rates: per-user rate terms averaged before the minimum.
pub fn averaged_noma_rates<T: Scalar>(samples: &[ChannelSet<T>], precoders: &PrecoderSet<T>, order: &[usize]) -> Result<RateReport<T>, ModelError> {
    let first = check_samples(samples)?;
    if samples.len() == 1 {
        return noma_rates(first, precoders, order);
    }
    check_mapping(precoders, order)?;
    if first.num_users() != 2 || first.num_tx_antennas() != precoders.num_tx_antennas() {
        return Err(ModelError::Dimension { what: "NOMA channel", expected: 2, found: first.num_users() });
    }
    let mut rf = [T::zero(); 2];
    let mut rs = [T::zero(); 2];
    for s in samples {
        let (f, p) = noma_terms(s, precoders, order);
        for u in 0..2 {
            rf[u] = rf[u] + log2_1p(f[u]);
            rs[u] = rs[u] + log2_1p(p[u]);
        }
    }
    let n = T::of(samples.len() as f64);
    Ok(report_from_sinrs(
        rf.map(|x| x / n),
        rs.map(|x| x / n),
        order,
        ReportMeta { averaging: Averaging::ExpectationOfRate { samples: samples.len() }, semantics: Semantics::Noma { decoding_order: order.to_vec() } },
        true,
    ))
}
