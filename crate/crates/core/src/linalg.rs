//! Small dense complex linear algebra for M-antenna vectors and M x M Hermitian matrices.
//!
//! Inner products follow the channel convention `h^H p`: the first argument is conjugated.

use num_traits::{One, Zero};

use crate::scalar::{Cx, Scalar};

/// `a^H b`.
pub fn inner<T: Scalar>(a: &[Cx<T>], b: &[Cx<T>]) -> Cx<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).fold(Cx::zero(), |acc, v| acc + v)
}

/// `||v||^2`.
pub fn norm_sqr<T: Scalar>(v: &[Cx<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Scales `v` in place.
pub fn scale<T: Scalar>(v: &mut [Cx<T>], factor: T) {
    for z in v {
        *z = *z * factor;
    }
}

/// Returns `v` rescaled to squared norm `power`, or the zero vector when `v` is zero.
pub fn with_power<T: Scalar>(v: &[Cx<T>], power: T) -> Vec<Cx<T>> {
    let n = norm_sqr(v);
    if n <= T::zero() {
        return vec![Cx::zero(); v.len()];
    }
    let f = (power / n).sqrt();
    v.iter().map(|z| *z * f).collect()
}

/// Solves `A x = b` for a small dense complex system by Gauss-Jordan elimination with
/// partial pivoting; `None` when `A` is numerically singular.
pub fn solve<T: Scalar>(mut a: Vec<Vec<Cx<T>>>, mut b: Vec<Cx<T>>) -> Option<Vec<Cx<T>>> {
    let n = b.len();
    let scale = a.iter().flatten().map(|z| z.norm()).fold(T::zero(), T::max);
    for col in 0..n {
        let pivot = (col..n).max_by(|x, y| a[*x][col].norm().partial_cmp(&a[*y][col].norm()).unwrap_or(std::cmp::Ordering::Equal))?;
        if a[pivot][col].norm() <= T::epsilon() * scale * T::of(n as f64) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = Cx::<T>::one() / a[col][col];
        for r in 0..n {
            if r != col {
                let f: Cx<T> = a[r][col] * inv;
                if !f.is_zero() {
                    for c in col..n {
                        let v = a[col][c];
                        a[r][c] = a[r][c] - f * v;
                    }
                    let v = b[col];
                    b[r] = b[r] - f * v;
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Dense square Hermitian matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian<T: Scalar> {
    dim: usize,
    data: Vec<Cx<T>>,
}

/// Eigendecomposition `A = V diag(values) V^H`; `vectors[i]` is the i-th eigenvector.
#[derive(Debug, Clone)]
pub struct Eigen<T: Scalar> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<Cx<T>>>,
}

impl<T: Scalar> Hermitian<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Cx::zero(); dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> Cx<T> {
        self.data[r * self.dim + c]
    }

    fn set(&mut self, r: usize, c: usize, v: Cx<T>) {
        self.data[r * self.dim + c] = v;
    }

    /// `A += w * v v^H`.
    pub fn add_outer(&mut self, weight: T, v: &[Cx<T>]) {
        debug_assert_eq!(v.len(), self.dim);
        for r in 0..self.dim {
            let vr = v[r] * weight;
            for c in 0..self.dim {
                let idx = r * self.dim + c;
                self.data[idx] = self.data[idx] + vr * v[c].conj();
            }
        }
    }

    /// `A += w * B`.
    pub fn add_scaled(&mut self, weight: T, other: &Hermitian<T>) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + *b * weight;
        }
    }

    pub fn mul_vec(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        (0..self.dim).map(|r| (0..self.dim).map(|c| self.get(r, c) * v[c]).fold(Cx::zero(), |acc, z| acc + z)).collect()
    }

    /// `v^H A v` (real for Hermitian `A`).
    pub fn quad_form(&self, v: &[Cx<T>]) -> T {
        let mut acc = T::zero();
        for r in 0..self.dim {
            let row = &self.data[r * self.dim..(r + 1) * self.dim];
            let av = row.iter().zip(v).fold(Cx::zero(), |a: Cx<T>, (x, y)| a + *x * *y);
            acc = acc + (v[r].conj() * av).re;
        }
        acc
    }

    fn off_diagonal_norm(&self) -> T {
        let mut s = T::zero();
        for r in 0..self.dim {
            for c in 0..self.dim {
                if r != c {
                    s = s + self.get(r, c).norm_sqr();
                }
            }
        }
        s.sqrt()
    }

    fn frobenius(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Cyclic complex Jacobi eigendecomposition.
    pub fn eigen(&self) -> Eigen<T> {
        let n = self.dim;
        let mut a = self.clone();
        let mut v: Vec<Vec<Cx<T>>> = (0..n).map(|r| (0..n).map(|c| if r == c { Cx::one() } else { Cx::zero() }).collect()).collect();
        let scale = a.frobenius();
        let tol = T::epsilon() * scale * T::of(n as f64);
        for _sweep in 0..64 {
            if a.off_diagonal_norm() <= tol || scale.is_zero() {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let b = a.get(p, q);
                    let babs = b.norm();
                    if babs <= T::min_positive_value() {
                        continue;
                    }
                    let phase = b / babs;
                    let app = a.get(p, p).re;
                    let aqq = a.get(q, q).re;
                    let theta = (aqq - app) / (T::of(2.0) * babs);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    // U = diag(1, conj(phase)) * [[c, s], [-s, c]] in the (p, q) block.
                    let upp = Cx::new(c, T::zero());
                    let upq = Cx::new(s, T::zero());
                    let uqp = phase.conj() * (-s);
                    let uqq = phase.conj() * c;
                    for r in 0..n {
                        let (arp, arq) = (a.get(r, p), a.get(r, q));
                        a.set(r, p, arp * upp + arq * uqp);
                        a.set(r, q, arp * upq + arq * uqq);
                        let (vrp, vrq) = (v[r][p], v[r][q]);
                        v[r][p] = vrp * upp + vrq * uqp;
                        v[r][q] = vrp * upq + vrq * uqq;
                    }
                    for r in 0..n {
                        let (apr, aqr) = (a.get(p, r), a.get(q, r));
                        a.set(p, r, upp.conj() * apr + uqp.conj() * aqr);
                        a.set(q, r, upq.conj() * apr + uqq.conj() * aqr);
                    }
                    a.set(p, q, Cx::zero());
                    a.set(q, p, Cx::zero());
                }
            }
        }
        let values = (0..n).map(|i| a.get(i, i).re).collect();
        let vectors = (0..n).map(|i| (0..n).map(|r| v[r][i]).collect()).collect();
        Eigen { values, vectors }
    }
}

impl<T: Scalar> Eigen<T> {
    /// Unit eigenvector of the largest eigenvalue.
    pub fn dominant(&self) -> &[Cx<T>] {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        &self.vectors[best]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Cx<f64>> {
        (0..n).map(|_| Cx::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
    }

    #[test]
    fn inner_conjugates_first_argument() {
        let h = [Cx::new(0.0, 1.0), Cx::new(0.0, 0.0)];
        let p = [Cx::new(1.0, 0.0), Cx::new(1.0, 0.0)];
        assert_eq!(inner(&h, &p), Cx::new(0.0, -1.0));
    }

    #[test]
    fn jacobi_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=5 {
            let mut a = Hermitian::zeros(n);
            for _ in 0..n + 1 {
                let v = random_vec(&mut rng, n);
                a.add_outer(rng.random::<f64>(), &v);
            }
            let e = a.eigen();
            for (val, vec) in e.values.iter().zip(&e.vectors) {
                let av = a.mul_vec(vec);
                for (x, y) in av.iter().zip(vec) {
                    assert!((x - y * *val).norm() < 1e-10, "n={n}");
                }
                assert!((norm_sqr(vec) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gauss_jordan_solves_complex_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: Vec<Vec<Cx<f64>>> = (0..4).map(|_| random_vec(&mut rng, 4)).collect();
        let x = random_vec(&mut rng, 4);
        let b: Vec<Cx<f64>> = a.iter().map(|row| row.iter().zip(&x).map(|(p, q)| p * q).sum()).collect();
        let got = solve(a, b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-10);
        }
        assert!(solve(vec![vec![Cx::new(1.0, 0.0), Cx::new(2.0, 0.0)]; 2], vec![Cx::new(1.0, 0.0); 2]).is_none());
    }

    #[test]
    fn dominant_vector_of_rank_one() {
        let v = [Cx::new(3.0, 0.0), Cx::new(0.0, 4.0)];
        let mut a = Hermitian::zeros(2);
        a.add_outer(1.0, &v);
        let e = a.eigen();
        let d = e.dominant();
        let overlap: f64 = inner(d, &v).norm();
        assert!((overlap - 5.0).abs() < 1e-10);
    }
}
