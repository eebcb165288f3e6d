//! Maximization of the piecewise surrogate over the power ball.
//!
//! The penalized objective is written as a minimum of finitely many "pieces", each a
//! nonnegative combination of rate terms plus a constant. With every term replaced by
//! its concave quadratic minorizer the subproblem is
//!
//! ```text
//! max_{||P||^2 <= power}  min_v L_v(P)
//! ```
//!
//! and is solved through its dual over the simplex of piece weights. For fixed weights
//! the inner maximization decouples per stream: `p_s = (A_s + mu I)^-1 b_s` with the power
//! multiplier `mu` found by bisection on the eigen-coordinates. The dual is handled by
//! constraint generation (start from the piece that is binding at the expansion point,
//! add the most violated piece when needed) and pairwise exact line searches between the
//! largest- and smallest-gradient pieces.

use num_traits::Zero;

use crate::linalg::{inner, Hermitian};
use crate::scalar::{Cx, Scalar};

use super::surrogate::{Layout, Streams, Surrogate};

/// `sum_j common[j] * c_j + sum_k private[k] * r_k + offset`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Piece<T: Scalar> {
    pub common: Vec<T>,
    pub private: Vec<T>,
    pub offset: T,
}

impl<T: Scalar> Piece<T> {
    pub fn value(&self, common: &[T], private: &[T]) -> T {
        let c: T = self.common.iter().zip(common).map(|(w, v)| *w * *v).sum();
        let p: T = self.private.iter().zip(private).map(|(w, v)| *w * *v).sum();
        c + p + self.offset
    }
}

/// Pieces of `R_c + sum_k r_k - rho * V`, where `V` is the QoS violation with the
/// common rate free to be shared among the recipients.
pub(crate) fn pieces<T: Scalar>(layout: &Layout, qos: T, rho: T) -> Vec<Piece<T>> {
    let k = layout.users();
    let with_qos = qos > T::zero() && rho > T::zero();
    let recipients: Vec<usize> = (0..k).filter(|u| layout.recipients[*u]).collect();
    let outsiders: Vec<usize> = (0..k).filter(|u| !layout.recipients[*u] || !layout.common_counts()).collect();

    let min_choices: Vec<Option<usize>> = if layout.common_counts() { (0..k).map(Some).collect() } else { vec![None] };
    // Shared-deficit term: None is the zero branch, otherwise (subset mask, common term).
    let mut deficit_choices: Vec<Option<(u64, usize)>> = vec![None];
    if with_qos && layout.common_counts() {
        for mask in 0..(1u64 << recipients.len()) {
            for j in 0..k {
                deficit_choices.push(Some((mask, j)));
            }
        }
    }
    let outsider_masks: u64 = if with_qos { 1u64 << outsiders.len() } else { 1 };

    let mut out = Vec::new();
    for m in &min_choices {
        for d in &deficit_choices {
            for om in 0..outsider_masks {
                let mut piece = Piece { common: vec![T::zero(); k], private: vec![T::one(); k], offset: T::zero() };
                if let Some(j) = m {
                    piece.common[*j] = piece.common[*j] + T::one();
                }
                if let Some((mask, j)) = d {
                    piece.common[*j] = piece.common[*j] + rho;
                    for (bit, u) in recipients.iter().enumerate() {
                        if mask >> bit & 1 == 1 {
                            piece.private[*u] = piece.private[*u] + rho;
                            piece.offset = piece.offset - rho * qos;
                        }
                    }
                }
                for (bit, u) in outsiders.iter().enumerate() {
                    if om >> bit & 1 == 1 {
                        piece.private[*u] = piece.private[*u] + rho;
                        piece.offset = piece.offset - rho * qos;
                    }
                }
                if !out.contains(&piece) {
                    out.push(piece);
                }
            }
        }
    }
    out
}

/// Minimum over pieces, i.e. the penalized objective for the given term values.
pub(crate) fn lower_envelope<T: Scalar>(pieces: &[Piece<T>], common: &[T], private: &[T]) -> T {
    pieces.iter().map(|p| p.value(common, private)).fold(T::infinity(), T::min)
}

struct Candidate<T: Scalar> {
    values: Vec<T>,
}

pub(crate) struct Subproblem<'a, T: Scalar> {
    surrogate: &'a Surrogate<T>,
    layout: &'a Layout,
    pieces: &'a [Piece<T>],
    power: T,
    tol: T,
    best: Option<(T, Streams<T>)>,
}

impl<'a, T: Scalar> Subproblem<'a, T> {
    pub fn new(surrogate: &'a Surrogate<T>, layout: &'a Layout, pieces: &'a [Piece<T>], power: T) -> Self {
        let tol = T::of(1e-10).max(T::epsilon() * T::of(1e3));
        Self { surrogate, layout, pieces, power, tol, best: None }
    }

    fn piece_values(&self, streams: &Streams<T>) -> Vec<T> {
        let (c, p) = self.surrogate.values(streams);
        self.pieces.iter().map(|v| v.value(&c, &p)).collect()
    }

    /// Inner maximization for fixed term weights.
    fn maximize_weighted(&self, wc: &[T], wp: &[T]) -> Streams<T> {
        let k = self.layout.users();
        let m = self.surrogate.common[0].linear.len();
        let mut a_common = Hermitian::zeros(m);
        let mut b_common = vec![Cx::zero(); m];
        for (j, term) in self.surrogate.common.iter().enumerate() {
            if wc[j] > T::zero() {
                a_common.add_scaled(wc[j], &term.quad);
                for (b, l) in b_common.iter_mut().zip(&term.linear) {
                    *b = *b + *l * wc[j];
                }
            }
        }
        let mut a_private = a_common.clone();
        for (u, term) in self.surrogate.private.iter().enumerate() {
            if wp[u] > T::zero() {
                a_private.add_scaled(wp[u], &term.quad);
            }
        }

        // Eigen-coordinates of every active stream: (stream, eigenvalues, vectors, coefficients).
        let mut coords: Vec<(Option<usize>, Vec<T>, Vec<Vec<Cx<T>>>, Vec<Cx<T>>)> = Vec::new();
        if self.layout.common_active {
            let e = a_common.eigen();
            let c = e.vectors.iter().map(|v| inner(v, &b_common)).collect();
            coords.push((None, e.values, e.vectors, c));
        }
        if self.layout.private_active.iter().any(|a| *a) {
            let e = a_private.eigen();
            for u in 0..k {
                if self.layout.private_active[u] && wp[u] > T::zero() {
                    let b: Vec<Cx<T>> = self.surrogate.private[u].linear.iter().map(|l| *l * wp[u]).collect();
                    let c = e.vectors.iter().map(|v| inner(v, &b)).collect();
                    coords.push((Some(u), e.values.clone(), e.vectors.clone(), c));
                }
            }
        }

        let floor = T::zero();
        let power_at = |mu: T| -> T {
            let mut f = T::zero();
            for (_, vals, _, c) in &coords {
                for (e, ci) in vals.iter().zip(c) {
                    let n = ci.norm_sqr();
                    if n > T::zero() {
                        let d = e.max(floor) + mu;
                        f = f + n / (d * d);
                    }
                }
            }
            f
        };
        let total: T = coords.iter().flat_map(|(_, _, _, c)| c.iter().map(|z| z.norm_sqr())).sum();
        let mut streams = Streams::zeros(m, k);
        if total <= T::zero() {
            return streams;
        }
        let unconstrained = power_at(T::zero());
        let mu = if unconstrained.is_finite() && unconstrained <= self.power {
            T::zero()
        } else {
            // f(mu) <= total / mu^2, so this upper end is always feasible.
            let mut hi = (total / self.power).sqrt();
            let mut lo = T::zero();
            for _ in 0..200 {
                let mid = (lo + hi) / T::of(2.0);
                if mid <= lo || mid >= hi {
                    break;
                }
                if power_at(mid) > self.power {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= T::epsilon() * hi {
                    break;
                }
            }
            hi
        };
        for (stream, vals, vecs, c) in &coords {
            let mut p = vec![Cx::zero(); m];
            for ((e, v), ci) in vals.iter().zip(vecs).zip(c) {
                if ci.norm_sqr() > T::zero() {
                    let f = *ci / (e.max(floor) + mu);
                    for (pi, vi) in p.iter_mut().zip(v) {
                        *pi = *pi + *vi * f;
                    }
                }
            }
            match stream {
                None => streams.common = p,
                Some(u) => streams.privates[*u] = p,
            }
        }
        let used = streams.power();
        if used > self.power {
            streams.scale_to(self.power);
        }
        streams
    }

    /// Evaluates the inner maximizer for dual weights `omega` over `active` pieces.
    fn evaluate(&mut self, active: &[usize], omega: &[T]) -> Candidate<T> {
        let k = self.layout.users();
        let mut wc = vec![T::zero(); k];
        let mut wp = vec![T::zero(); k];
        for (idx, w) in active.iter().zip(omega) {
            if *w > T::zero() {
                let piece = &self.pieces[*idx];
                for u in 0..k {
                    wc[u] = wc[u] + *w * piece.common[u];
                    wp[u] = wp[u] + *w * piece.private[u];
                }
            }
        }
        let streams = self.maximize_weighted(&wc, &wp);
        let values = self.piece_values(&streams);
        let envelope = values.iter().copied().fold(T::infinity(), T::min);
        if self.best.as_ref().map_or(true, |(b, _)| envelope > *b) {
            self.best = Some((envelope, streams));
        }
        Candidate { values }
    }

    /// Pairwise exact line searches on the restricted dual.
    fn solve_restricted(&mut self, active: &[usize], omega: &mut [T]) -> Candidate<T> {
        let mut cand = self.evaluate(active, omega);
        for _ in 0..200 {
            let g: Vec<T> = active.iter().map(|v| cand.values[*v]).collect();
            let mut i = usize::MAX;
            let mut j = 0;
            for a in 0..active.len() {
                if omega[a] > T::zero() && (i == usize::MAX || g[a] > g[i]) {
                    i = a;
                }
                if g[a] < g[j] {
                    j = a;
                }
            }
            if i == usize::MAX || g[i] - g[j] <= self.tol {
                break;
            }
            let (vi, vj) = (active[i], active[j]);
            let span = omega[i];
            let base = omega.to_vec();
            let slope = |this: &mut Self, t: T| -> (T, Candidate<T>) {
                let mut w = base.clone();
                w[i] = (span - t).max(T::zero());
                w[j] = w[j] + t;
                let c = this.evaluate(active, &w);
                (c.values[vj] - c.values[vi], c)
            };
            let (f_hi, c_hi) = slope(self, span);
            let t = if f_hi <= T::zero() {
                cand = c_hi;
                span
            } else {
                let (mut a, mut fa) = (T::zero(), g[j] - g[i]);
                let (mut b, mut fb) = (span, f_hi);
                let mut side = 0i8;
                let mut t = span;
                let mut last = c_hi;
                for _ in 0..80 {
                    let mut next = (a * fb - b * fa) / (fb - fa);
                    if !(next > a && next < b) {
                        next = (a + b) / T::of(2.0);
                    }
                    let (ft, c) = slope(self, next);
                    t = next;
                    last = c;
                    if ft.abs() <= self.tol / T::of(4.0) || b - a <= T::epsilon() * T::of(8.0) * span {
                        break;
                    }
                    if ft < T::zero() {
                        a = next;
                        fa = ft;
                        if side == -1 {
                            fb = fb / T::of(2.0);
                        }
                        side = -1;
                    } else {
                        b = next;
                        fb = ft;
                        if side == 1 {
                            fa = fa / T::of(2.0);
                        }
                        side = 1;
                    }
                }
                cand = last;
                t
            };
            omega[i] = (span - t).max(T::zero());
            omega[j] = omega[j] + t;
        }
        cand
    }

    /// Best point found for the full subproblem, starting from the binding piece at
    /// `current`.
    pub fn solve(mut self, current: &Streams<T>) -> Streams<T> {
        let start_values = self.piece_values(current);
        let first = argmin(&start_values);
        let mut active = vec![first];
        let mut omega = vec![T::one()];
        for _ in 0..self.pieces.len() {
            let cand = self.solve_restricted(&active, &mut omega);
            let restricted = active.iter().map(|v| cand.values[*v]).fold(T::infinity(), T::min);
            let worst = argmin(&cand.values);
            if cand.values[worst] >= restricted - self.tol || active.contains(&worst) {
                break;
            }
            active.push(worst);
            omega.push(T::zero());
        }
        match self.best {
            Some((_, s)) => s,
            None => current.clone(),
        }
    }
}

fn argmin<T: Scalar>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}
