use num_complex::Complex64;
use rsma_core::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// Direct restatement of the decoding rules, written against plain slices.
fn oracle_rates(h: &[Vec<Complex64>], pc: &[Complex64], pk: &[Vec<Complex64>], split: &[f64], noise: &[f64]) -> Vec<f64> {
    let dot = |a: &[Complex64], b: &[Complex64]| -> f64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr() };
    let k = h.len();
    let mut common = f64::INFINITY;
    let mut private = vec![0.0; k];
    for u in 0..k {
        let all: f64 = pk.iter().map(|p| dot(&h[u], p)).sum();
        let own = dot(&h[u], &pk[u]);
        common = common.min((1.0 + dot(&h[u], pc) / (all + noise[u])).log2());
        private[u] = (1.0 + own / (all - own + noise[u])).log2();
    }
    (0..k).map(|u| split[u] * common + private[u]).collect()
}

fn random_instance(seed: u64, k: usize, m: usize) -> (Vec<Vec<Complex64>>, Vec<Complex64>, Vec<Vec<Complex64>>) {
    let mut s = rng::CounterStream::new(seed, 77, 0, 0);
    let mut v = |n: usize| -> Vec<Complex64> {
        (0..n)
            .map(|_| {
                let (a, b) = s.complex_normal(1.0);
                c(a, b)
            })
            .collect()
    };
    let h = (0..k).map(|_| v(m)).collect();
    let pc = v(m);
    let pk = (0..k).map(|_| v(m)).collect();
    (h, pc, pk)
}

#[test]
fn rate_report_matches_direct_formulas() {
    for seed in 0..50 {
        let (h, pc, pk) = random_instance(seed, 3, 4);
        let noise = vec![0.5, 1.0, 2.0];
        let split = vec![0.2, 0.5, 0.3];
        let ch = ChannelSet::perfect(h.clone(), noise.clone()).unwrap();
        let set = PrecoderSet::new(pc.clone(), pk.clone(), split.clone(), 100.0).unwrap();
        let rep = rate_report(&ch, &set).unwrap();
        let expected = oracle_rates(&h, &pc, &pk, &split, &noise);
        for (a, b) in rep.rate_total.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12, "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn received_sample_is_composition_of_transmit_and_channel() {
    let (h, pc, pk) = random_instance(9, 2, 3);
    let ch = ChannelSet::perfect_unit_noise(h.clone()).unwrap();
    let set = PrecoderSet::new(pc.clone(), pk.clone(), vec![1.0, 0.0], 100.0).unwrap();
    let symbols = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, -1.0)];
    let x = transmit_signal(&set, &symbols).unwrap();
    for u in 0..2 {
        let y = received_sample(&ch, u, &x, c(0.1, -0.2)).unwrap();
        let direct: Complex64 = (0..3).map(|i| h[u][i].conj() * (pc[i] * symbols[0] + pk[0][i] * symbols[1] + pk[1][i] * symbols[2])).sum();
        assert!((y - direct - c(0.1, -0.2)).norm() < 1e-12);
    }
}

#[test]
fn averaged_report_averages_terms_before_the_minimum() {
    let cfg = CsitConfig::new(2, 2, 0.5, 100.0, 4);
    let block = draw_block::<f64>(&cfg, 3).unwrap();
    let samples = conditional_draws(&block, &cfg, 3, DrawPurpose::Evaluate, 40).unwrap();
    let (_, pc, pk) = random_instance(4, 2, 2);
    let set = PrecoderSet::new(pc, pk, vec![0.3, 0.7], 100.0).unwrap();
    let avg = averaged_rate_report(&samples, &set).unwrap();
    let reports: Vec<RateReport> = samples.iter().map(|s| rate_report(s, &set).unwrap()).collect();
    let n = samples.len() as f64;
    let mean_common: Vec<f64> = (0..2).map(|u| reports.iter().map(|r| r.common_stream_rates()[u]).sum::<f64>() / n).collect();
    let mean_private: Vec<f64> = (0..2).map(|u| reports.iter().map(|r| r.rate_private[u]).sum::<f64>() / n).collect();
    let rc = mean_common[0].min(mean_common[1]);
    assert!((avg.rate_common - rc).abs() < 1e-12);
    for u in 0..2 {
        assert!((avg.rate_private[u] - mean_private[u]).abs() < 1e-12);
        assert!((avg.rate_total[u] - ([0.3, 0.7][u] * rc + mean_private[u])).abs() < 1e-12);
    }
    // Mean of per-sample minima is never above the minimum of means.
    let mean_of_min = reports.iter().map(|r| r.rate_common).sum::<f64>() / n;
    assert!(mean_of_min <= avg.rate_common + 1e-12);
}

#[test]
fn sdma_is_rate_splitting_without_common_stream() {
    for seed in 100..200 {
        let (h, pc, pk) = random_instance(seed, 3, 3);
        let ch = ChannelSet::perfect_unit_noise(h).unwrap();
        let rs = PrecoderSet::new(pc, pk.clone(), vec![1.0, 0.0, 0.0], 1e3).unwrap().drop_common();
        let sd = PrecoderSet::without_common(pk, 1e3).unwrap();
        let a = rate_report(&ch, &rs).unwrap();
        let b = rate_report(&ch, &sd).unwrap();
        assert_eq!(a.rate_total, b.rate_total);
        assert_eq!(a.rate_common, 0.0);
    }
}

#[test]
fn generated_channels_have_unit_variance_entries() {
    let cfg = CsitConfig::new(2, 2, 0.6, 100.0, 8);
    let blocks = 25_000;
    let (mut true_pow, mut est_pow, mut err_pow) = (0.0, 0.0, 0.0);
    let sigma2 = 100f64.powf(-0.6);
    for b in 0..blocks {
        let blk = draw_block::<f64>(&cfg, b).unwrap();
        for u in 0..2 {
            for j in 0..2 {
                true_pow += blk.true_channels()[u][j].norm_sqr();
                est_pow += blk.estimate()[u][j].norm_sqr();
                let d = blk.true_channels()[u][j] - blk.estimate()[u][j] * (1.0 - sigma2).sqrt();
                err_pow += d.norm_sqr();
            }
        }
    }
    let n = (blocks * 4) as f64;
    assert!((true_pow / n - 1.0).abs() < 0.03, "true {}", true_pow / n);
    assert!((est_pow / n - 1.0).abs() < 0.03, "estimate {}", est_pow / n);
    assert!((err_pow / n / sigma2 - 1.0).abs() < 0.03, "error {}", err_pow / n);
}

#[test]
fn conditional_mean_is_scaled_estimate() {
    let cfg = CsitConfig::new(2, 2, 0.3, 100.0, 5);
    let block = draw_block::<f64>(&cfg, 0).unwrap();
    let draws = conditional_draws(&block, &cfg, 0, DrawPurpose::Optimize, 10_000).unwrap();
    let s2 = 100f64.powf(-0.3);
    for u in 0..2 {
        for j in 0..2 {
            let mean: Complex64 = draws.iter().map(|d| d.true_channels()[u][j]).sum::<Complex64>() / draws.len() as f64;
            let expected = block.estimate()[u][j] * (1.0 - s2).sqrt();
            // Standard error of the mean is sigma / 100 per component.
            assert!((mean - expected).norm() < 0.03 * (1.0 + expected.norm()), "{mean} vs {expected}");
        }
    }
}
