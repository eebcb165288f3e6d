//! Concave quadratic minorizers of the sample-average rate terms.
//!
//! For a stream decoded with scalar equalizer `g` and MSE weight `u`,
//! `log(1 + sinr) >= 1 + ln u - u * e(g, P)` where `e` is the (quadratic) mean squared
//! error; equality holds at the MMSE equalizer and `u = 1 / mmse`. Averaging over the
//! conditional samples keeps the bound, so each rate term is minorized by
//!
//! ```text
//! r(P) = offset - sum_{s in interferers} p_s^H Q p_s + 2 Re(b^H p_own)
//! ```
//!
//! which is tight at the precoders the equalizers and weights were computed for.

use num_traits::Zero;

use crate::linalg::{inner, Hermitian};
use crate::model::ChannelSet;
use crate::scalar::{Cx, Scalar};

/// Which streams the optimizer may use and which users can be credited common rate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Layout {
    pub common_active: bool,
    pub private_active: Vec<bool>,
    pub recipients: Vec<bool>,
}

impl Layout {
    pub fn users(&self) -> usize {
        self.private_active.len()
    }

    /// Common rate counts toward the objective only when someone can receive it.
    pub fn common_counts(&self) -> bool {
        self.common_active && self.recipients.iter().any(|r| *r)
    }
}

/// Working precoders.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Streams<T: Scalar> {
    pub common: Vec<Cx<T>>,
    pub privates: Vec<Vec<Cx<T>>>,
}

impl<T: Scalar> Streams<T> {
    pub fn zeros(antennas: usize, users: usize) -> Self {
        Self { common: vec![Cx::zero(); antennas], privates: vec![vec![Cx::zero(); antennas]; users] }
    }

    pub fn power(&self) -> T {
        crate::linalg::norm_sqr(&self.common) + self.privates.iter().map(|p| crate::linalg::norm_sqr(p)).sum::<T>()
    }

    /// Zeroes inactive streams.
    pub fn restrict(&mut self, layout: &Layout) {
        if !layout.common_active {
            self.common.iter_mut().for_each(|z| *z = Cx::zero());
        }
        for (p, active) in self.privates.iter_mut().zip(&layout.private_active) {
            if !active {
                p.iter_mut().for_each(|z| *z = Cx::zero());
            }
        }
    }

    /// Scales the whole set to total power `target` (no-op for the zero set).
    pub fn scale_to(&mut self, target: T) {
        let p = self.power();
        if p > T::zero() {
            let f = (target / p).sqrt();
            crate::linalg::scale(&mut self.common, f);
            for v in &mut self.privates {
                crate::linalg::scale(v, f);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Term<T: Scalar> {
    pub quad: Hermitian<T>,
    pub linear: Vec<Cx<T>>,
    pub offset: T,
}

impl<T: Scalar> Term<T> {
    fn zeros(m: usize) -> Self {
        Self { quad: Hermitian::zeros(m), linear: vec![Cx::zero(); m], offset: T::zero() }
    }

    fn accumulate(&mut self, h: &[Cx<T>], own_gain: Cx<T>, total: T, interference: T, noise: T, weight: T) {
        // MMSE equalizer and weight at the current point.
        let g = own_gain.conj() / total;
        let u = total / interference;
        let g2 = g.norm_sqr();
        self.quad.add_outer(weight * u * g2, h);
        let lin = g.conj() * (u * weight);
        for (b, hi) in self.linear.iter_mut().zip(h) {
            *b = *b + *hi * lin;
        }
        self.offset = self.offset + weight * (T::one() + u.ln() - u - u * g2 * noise);
    }
}

/// Minorizers for every common term (one per user) and every private term.
#[derive(Debug, Clone)]
pub(crate) struct Surrogate<T: Scalar> {
    pub common: Vec<Term<T>>,
    pub private: Vec<Term<T>>,
}

impl<T: Scalar> Surrogate<T> {
    pub fn build(samples: &[ChannelSet<T>], streams: &Streams<T>) -> Self {
        let k = streams.privates.len();
        let m = streams.common.len();
        let mut common: Vec<Term<T>> = (0..k).map(|_| Term::zeros(m)).collect();
        let mut private: Vec<Term<T>> = (0..k).map(|_| Term::zeros(m)).collect();
        // Rates in bits, averaged over samples.
        let weight = T::one() / (T::of(samples.len() as f64) * T::LN_2());
        let mut gains = vec![Cx::zero(); k];
        for sample in samples {
            for user in 0..k {
                let h = sample.channel(user);
                let noise = sample.noise_vars()[user];
                let gc = inner(h, &streams.common);
                for (g, p) in gains.iter_mut().zip(&streams.privates) {
                    *g = inner(h, p);
                }
                let private_total: T = gains.iter().map(|g| g.norm_sqr()).sum::<T>() + noise;
                let common_total = private_total + gc.norm_sqr();
                common[user].accumulate(h, gc, common_total, private_total, noise, weight);
                let own = gains[user];
                private[user].accumulate(h, own, private_total, private_total - own.norm_sqr(), noise, weight);
            }
        }
        Self { common, private }
    }

    pub fn common_value(&self, user: usize, streams: &Streams<T>) -> T {
        let t = &self.common[user];
        let mut v = t.offset - t.quad.quad_form(&streams.common) + T::of(2.0) * inner(&t.linear, &streams.common).re;
        for p in &streams.privates {
            v = v - t.quad.quad_form(p);
        }
        v
    }

    pub fn private_value(&self, user: usize, streams: &Streams<T>) -> T {
        let t = &self.private[user];
        let mut v = t.offset + T::of(2.0) * inner(&t.linear, &streams.privates[user]).re;
        for p in &streams.privates {
            v = v - t.quad.quad_form(p);
        }
        v
    }

    /// `(common terms, private terms)` at `streams`.
    pub fn values(&self, streams: &Streams<T>) -> (Vec<T>, Vec<T>) {
        let k = self.common.len();
        ((0..k).map(|u| self.common_value(u, streams)).collect(), (0..k).map(|u| self.private_value(u, streams)).collect())
    }
}

/// Exact per-user mean `(common, private)` rate terms in bits at `streams`.
pub(crate) fn true_terms<T: Scalar>(samples: &[ChannelSet<T>], streams: &Streams<T>) -> (Vec<T>, Vec<T>) {
    let k = streams.privates.len();
    let mut common = vec![T::zero(); k];
    let mut private = vec![T::zero(); k];
    let mut gains = vec![T::zero(); k];
    for sample in samples {
        for user in 0..k {
            let h = sample.channel(user);
            let noise = sample.noise_vars()[user];
            for (g, p) in gains.iter_mut().zip(&streams.privates) {
                *g = inner(h, p).norm_sqr();
            }
            let total: T = gains.iter().copied().sum::<T>() + noise;
            let gc = inner(h, &streams.common).norm_sqr();
            common[user] = common[user] + (gc / total).ln_1p();
            private[user] = private[user] + (gains[user] / (total - gains[user])).ln_1p();
        }
    }
    let n = T::of(samples.len() as f64) * T::LN_2();
    (common.into_iter().map(|v| v / n).collect(), private.into_iter().map(|v| v / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csit::{conditional_draws, draw_block, CsitConfig, DrawPurpose};
    use crate::model::{mean_rate_terms, PrecoderSet};

    fn random_streams(seed: u64, m: usize, k: usize) -> Streams<f64> {
        let mut s = crate::rng::CounterStream::new(seed, 0, 0, 0);
        let mut v = || {
            (0..m)
                .map(|_| {
                    let (a, b) = s.complex_normal(1.0);
                    Cx::new(a, b)
                })
                .collect::<Vec<_>>()
        };
        let common = v();
        let privates = (0..k).map(|_| v()).collect();
        Streams { common, privates }
    }

    fn to_set(s: &Streams<f64>) -> PrecoderSet {
        let k = s.privates.len();
        let mut split = vec![0.0; k];
        split[0] = 1.0;
        PrecoderSet::new(s.common.clone(), s.privates.clone(), split, s.power() * 2.0).unwrap()
    }

    #[test]
    fn minorizer_is_tight_at_expansion_point() {
        let cfg = CsitConfig::new(3, 3, 0.5, 30.0, 17);
        let block = draw_block::<f64>(&cfg, 2).unwrap();
        let samples = conditional_draws(&block, &cfg, 2, DrawPurpose::Optimize, 16).unwrap();
        let streams = random_streams(5, 3, 3);
        let sur = Surrogate::build(&samples, &streams);
        let (sc, sp) = sur.values(&streams);
        let (tc, tp) = mean_rate_terms(&samples, &to_set(&streams));
        for k in 0..3 {
            assert!((sc[k] - tc[k]).abs() < 1e-10, "common {k}: {} vs {}", sc[k], tc[k]);
            assert!((sp[k] - tp[k]).abs() < 1e-10, "private {k}: {} vs {}", sp[k], tp[k]);
        }
    }

    #[test]
    fn minorizer_lower_bounds_elsewhere() {
        let cfg = CsitConfig::new(2, 2, 0.6, 100.0, 23);
        let block = draw_block::<f64>(&cfg, 0).unwrap();
        let samples = conditional_draws(&block, &cfg, 0, DrawPurpose::Optimize, 8).unwrap();
        let base = random_streams(1, 2, 2);
        let sur = Surrogate::build(&samples, &base);
        for seed in 10..40 {
            let other = random_streams(seed, 2, 2);
            let (sc, sp) = sur.values(&other);
            let (tc, tp) = mean_rate_terms(&samples, &to_set(&other));
            for k in 0..2 {
                assert!(sc[k] <= tc[k] + 1e-12);
                assert!(sp[k] <= tp[k] + 1e-12);
            }
        }
    }
}
