//! Successive-cancellation list decoding with min-sum updates.
//!
//! The recursion follows the encoder's structure: a node of length `n` receives the LLRs
//! of its code bits for every live path, decodes its check half, then its variable half,
//! and returns the re-encoded code bits together with the surviving path ancestry. Only
//! node-sized buffers are reordered when paths fork or die, so work stays at
//! `O(L N log N)`.
//!
//! Path metrics grow by `|llr|` whenever a leaf decision disagrees with the sign of its
//! LLR (positive LLR favors bit 0).

pub(crate) struct ListDecoder<'a> {
    pub frozen: &'a [bool],
    pub list_size: usize,
}

fn check_node(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -m
    } else {
        m
    }
}

fn variable_node(a: f64, b: f64, bit: u8) -> f64 {
    if bit == 0 {
        b + a
    } else {
        b - a
    }
}

impl ListDecoder<'_> {
    /// Decodes `llrs` and returns candidate codewords with their metrics, best first.
    pub fn run(&self, llrs: &[f64]) -> Vec<(Vec<u8>, f64)> {
        let n = llrs.len();
        let mut metrics = vec![0.0];
        let (beta, _) = self.node(llrs, 1, n, 0, &mut metrics);
        let mut out: Vec<(Vec<u8>, f64)> = metrics.iter().enumerate().map(|(p, m)| (beta[p * n..(p + 1) * n].to_vec(), *m)).collect();
        out.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        out
    }

    fn node(&self, alpha: &[f64], paths: usize, n: usize, offset: usize, metrics: &mut Vec<f64>) -> (Vec<u8>, Vec<usize>) {
        if n == 1 {
            return self.leaf(alpha, paths, offset, metrics);
        }
        let half = n / 2;
        let mut left = vec![0.0; paths * half];
        for p in 0..paths {
            let a = &alpha[p * n..(p + 1) * n];
            for j in 0..half {
                left[p * half + j] = check_node(a[j], a[j + half]);
            }
        }
        let (beta_left, perm_left) = self.node(&left, paths, half, offset, metrics);
        let after_left = perm_left.len();
        let mut right = vec![0.0; after_left * half];
        for (i, origin) in perm_left.iter().enumerate() {
            let a = &alpha[origin * n..(origin + 1) * n];
            for j in 0..half {
                right[i * half + j] = variable_node(a[j], a[j + half], beta_left[i * half + j]);
            }
        }
        let (beta_right, perm_right) = self.node(&right, after_left, half, offset + half, metrics);
        let survivors = perm_right.len();
        let mut beta = vec![0u8; survivors * n];
        let mut perm = Vec::with_capacity(survivors);
        for (i, mid) in perm_right.iter().enumerate() {
            for j in 0..half {
                let r = beta_right[i * half + j];
                beta[i * n + j] = beta_left[mid * half + j] ^ r;
                beta[i * n + j + half] = r;
            }
            perm.push(perm_left[*mid]);
        }
        (beta, perm)
    }

    fn leaf(&self, alpha: &[f64], paths: usize, index: usize, metrics: &mut Vec<f64>) -> (Vec<u8>, Vec<usize>) {
        if self.frozen[index] {
            for (m, a) in metrics.iter_mut().zip(alpha) {
                if *a < 0.0 {
                    *m -= a;
                }
            }
            return (vec![0; paths], (0..paths).collect());
        }
        // Candidate c = 2 * path + bit.
        let mut cands: Vec<(f64, usize)> = Vec::with_capacity(2 * paths);
        for p in 0..paths {
            let a = alpha[p];
            let hard = u8::from(a < 0.0);
            for bit in 0..2u8 {
                let penalty = if bit == hard { 0.0 } else { a.abs() };
                cands.push((metrics[p] + penalty, 2 * p + bit as usize));
            }
        }
        if cands.len() > self.list_size {
            cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
            cands.truncate(self.list_size);
            cands.sort_by_key(|c| c.1);
        }
        let beta = cands.iter().map(|c| (c.1 & 1) as u8).collect();
        let perm = cands.iter().map(|c| c.1 / 2).collect();
        *metrics = cands.iter().map(|c| c.0).collect();
        (beta, perm)
    }
}
