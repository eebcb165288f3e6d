//! Degrees-of-freedom estimates and their high-SNR predictions.
//!
//! The DoF of a strategy is the slope of its sum rate against `log2(P)` at high SNR.

use crate::model::ModelError;
use crate::scalar::Scalar;

/// Least-squares slope of `sum_rate` against `log2(P)` for `(snr_db, sum_rate)` points,
/// with `P = 10^(snr_db / 10)`.
pub fn dof_slope<T: Scalar>(points: &[(T, T)]) -> Result<T, ModelError> {
    if points.len() < 2 {
        return Err(ModelError::Parameter(format!("need at least 2 points for a slope, got {}", points.len())));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(ModelError::Parameter("non-finite point in slope fit".into()));
    }
    let scale = T::of(10f64.log2() / 10.0);
    let xs: Vec<T> = points.iter().map(|(db, _)| *db * scale).collect();
    let n = T::of(points.len() as f64);
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = points.iter().map(|(_, y)| *y).sum::<T>() / n;
    let sxx: T = xs.iter().map(|x| (*x - mx) * (*x - mx)).sum();
    if !(sxx > T::zero()) {
        return Err(ModelError::Parameter("slope fit needs at least two distinct SNR values".into()));
    }
    let sxy: T = xs.iter().zip(points).map(|(x, (_, y))| (*x - mx) * (*y - my)).sum();
    Ok(sxy / sxx)
}

/// High-SNR sum DoF of SDMA (linear precoding) with `users` users and CSIT quality
/// `alpha`: `max(1, K * alpha)`.
pub fn predicted_dof_sdma(users: usize, alpha: f64) -> f64 {
    (users as f64 * alpha).max(1.0)
}

/// High-SNR sum DoF of rate splitting: `1 + (K - 1) * alpha`.
pub fn predicted_dof_rsma(users: usize, alpha: f64) -> f64 {
    1.0 + (users.max(1) - 1) as f64 * alpha
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predictions_for_two_users() {
        for (alpha, sdma, rsma) in [(0.0, 1.0, 1.0), (0.6, 1.2, 1.6), (1.0, 2.0, 2.0)] {
            assert!((predicted_dof_sdma(2, alpha) - sdma).abs() < 1e-12);
            assert!((predicted_dof_rsma(2, alpha) - rsma).abs() < 1e-12);
        }
    }

    #[test]
    fn slope_of_exact_line() {
        // rate = 1.5 * log2(P) + 2
        let pts: Vec<(f64, f64)> = [20.0, 30.0, 40.0].iter().map(|db| (*db, 1.5 * (db / 10.0) * 10f64.log2() + 2.0)).collect();
        assert!((dof_slope(&pts).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn slope_rejects_degenerate_input() {
        assert!(dof_slope(&[(10.0, 1.0)]).is_err());
        assert!(dof_slope(&[(10.0, 1.0), (10.0, 2.0)]).is_err());
        assert!(dof_slope(&[(10.0, f64::NAN), (20.0, 2.0)]).is_err());
    }
}
