//! Frozen-set construction by density evolution under the Gaussian approximation.
//!
//! Every bit-channel LLR is modeled as `N(m, 2m)`; the check (minus) transform maps a
//! mean `m` to `phi^-1(1 - (1 - phi(m))^2)` and the variable (plus) transform to `2m`.
//! `phi` is Chung's two-piece approximation.

fn phi(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < 10.0 {
        (-0.4527 * x.powf(0.86) + 0.0218).exp()
    } else {
        (std::f64::consts::PI / x).sqrt() * (-x / 4.0).exp() * (1.0 - 10.0 / (7.0 * x))
    }
}

fn phi_inverse(y: f64) -> f64 {
    if y >= 1.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return f64::INFINITY;
    }
    // phi is decreasing; bracket then bisect.
    let mut hi = 1.0;
    while phi(hi) > y {
        hi *= 2.0;
        if hi > 1e6 {
            return hi;
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn check_mean(m: f64) -> f64 {
    let p = phi(m);
    // 1 - (1 - p)^2 without cancellation.
    phi_inverse(p * (2.0 - p))
}

/// LLR means of the `n` synthesized bit-channels (natural index order, most significant
/// index bit selecting the first transform stage) for BPSK at `design_snr_db` (Es/N0).
pub fn bit_channel_means(n: usize, design_snr_db: f64) -> Vec<f64> {
    assert!(n.is_power_of_two(), "block length must be a power of two");
    let base = 4.0 * 10f64.powf(design_snr_db / 10.0);
    let mut means = vec![base];
    // Each pass splits every sub-code into its check half (lower indices) and its
    // variable half, one index bit at a time from the most significant.
    while means.len() < n {
        means = means.iter().flat_map(|m| [check_mean(*m), 2.0 * m]).collect();
    }
    means
}

/// Information positions (sorted ascending): the `k` most reliable bit-channels.
/// Ties go to the higher index.
pub fn information_set(n: usize, k: usize, design_snr_db: f64) -> Vec<usize> {
    let means = bit_channel_means(n, design_snr_db);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| means[*b].partial_cmp(&means[*a]).unwrap_or(std::cmp::Ordering::Equal).then(b.cmp(a)));
    let mut info: Vec<usize> = order.into_iter().take(k).collect();
    info.sort_unstable();
    info
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_inverse_round_trips() {
        for x in [0.1, 1.0, 5.0, 9.9, 12.0, 40.0] {
            assert!((phi_inverse(phi(x)) - x).abs() < 1e-6 * x.max(1.0));
        }
    }

    #[test]
    fn extreme_channels_for_n4() {
        let m = bit_channel_means(4, 0.0);
        // u0 is the worst channel (two check stages), u3 the best (two variable stages).
        assert!(m[0] < m[1] && m[0] < m[2]);
        assert!(m[3] > m[1] && m[3] > m[2]);
        assert!((m[3] - 16.0).abs() < 1e-12);
    }

    #[test]
    fn information_set_is_nested_in_k() {
        let a = information_set(256, 100, 0.0);
        let b = information_set(256, 120, 0.0);
        assert!(a.iter().all(|i| b.contains(i)));
        assert_eq!(a.len(), 100);
        assert!(a.contains(&255) && !a.contains(&0));
    }
}
