use num_complex::Complex64;
use rsma_core::rng::CounterStream;
use rsma_phy::amc::{amc_select, CodeRate, Mcs, McsTable};
use rsma_phy::qam::{qam_demap, qam_map, Qam};

const ORDERS: [u32; 4] = [4, 16, 64, 256];

fn all_symbols(order: u32) -> Vec<(Vec<u8>, Complex64)> {
    let q = order.trailing_zeros() as usize;
    (0..order as usize)
        .map(|v| {
            let bits: Vec<u8> = (0..q).map(|i| ((v >> i) & 1) as u8).collect();
            let s = qam_map(&bits, order).unwrap()[0];
            (bits, s)
        })
        .collect()
}

#[test]
fn qpsk_zero_bits_map_to_first_quadrant() {
    let s = qam_map(&[0, 0], 4).unwrap()[0];
    let r = 0.5f64.sqrt();
    assert!((s - Complex64::new(r, r)).norm() < 1e-15);
}

#[test]
fn sixteen_qam_energy_is_one() {
    // Levels {±1, ±3} on each axis, each used by 8 of the 16 points per sign pattern:
    // sum |s|^2 = 16 * 2 * (1 + 9) / 2 = 160, scaled by 1/10 and averaged over 16.
    let sum: i64 = (0..16)
        .map(|v| {
            let lv = [1i64, 3, -1, -3];
            let (i, q) = (lv[v & 3], lv[v >> 2]);
            i * i + q * q
        })
        .sum();
    let oracle = sum as f64 / 10.0 / 16.0;
    assert_eq!(oracle, 1.0);
    let mean = all_symbols(16).iter().map(|(_, s)| s.norm_sqr()).sum::<f64>() / 16.0;
    assert!((mean - oracle).abs() < 1e-15, "{mean}");
}

#[test]
fn every_order_has_unit_energy_and_distinct_points() {
    for order in ORDERS {
        let pts = all_symbols(order);
        let mean = pts.iter().map(|(_, s)| s.norm_sqr()).sum::<f64>() / order as f64;
        assert!((mean - 1.0).abs() < 1e-12, "order {order}: {mean}");
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                assert!((pts[i].1 - pts[j].1).norm() > 1e-6);
            }
        }
    }
}

#[test]
fn nearest_neighbours_differ_in_one_bit() {
    for order in ORDERS {
        let pts = all_symbols(order);
        let dmin = pts.iter().flat_map(|a| pts.iter().map(move |b| (a.1 - b.1).norm())).filter(|d| *d > 1e-9).fold(f64::INFINITY, f64::min);
        for (ba, a) in &pts {
            for (bb, b) in &pts {
                if ((a - b).norm() - dmin).abs() < 1e-9 {
                    let diff = ba.iter().zip(bb).filter(|(x, y)| x != y).count();
                    assert_eq!(diff, 1, "order {order}");
                }
            }
        }
    }
}

#[test]
fn zero_noise_llr_signs_reproduce_bits() {
    let mut rng = CounterStream::new(3, 3, 3, 3);
    for order in ORDERS {
        let q = order.trailing_zeros() as usize;
        let bits: Vec<u8> = (0..q * 200).map(|_| rng.bit()).collect();
        let syms = qam_map(&bits, order).unwrap();
        let llrs = qam_demap(&syms, order, 0.01, 0.0).unwrap();
        for (b, l) in bits.iter().zip(&llrs) {
            assert!(if *b == 0 { *l > 0.0 } else { *l < 0.0 }, "order {order}");
        }
    }
}

#[test]
fn llr_matches_exact_max_log_oracle() {
    let qam = Qam::new(16).unwrap();
    let pts = all_symbols(16);
    let y = Complex64::new(0.3, -0.7);
    let n0 = 0.4;
    let mut got = Vec::new();
    qam.demap_symbol(y, n0, &mut got);
    for i in 0..4 {
        let best = |bit: u8| pts.iter().filter(|(b, _)| b[i] == bit).map(|(_, s)| (y - s).norm_sqr()).fold(f64::INFINITY, f64::min);
        let want = (best(1) - best(0)) / n0;
        assert!((got[i] - want).abs() < 1e-12, "bit {i}: {} vs {want}", got[i]);
    }
}

#[test]
fn interference_widens_llrs_like_noise() {
    let syms = qam_map(&[0, 1, 1, 0], 16).unwrap();
    assert_eq!(qam_demap(&syms, 16, 0.1, 0.3).unwrap(), qam_demap(&syms, 16, 0.4, 0.0).unwrap());
}

#[test]
fn amc_boundaries() {
    let table = McsTable::default_table();
    let lowest = table.entries()[0].spectral_efficiency();
    assert_eq!(amc_select(0.0, &table, 0.9), None);
    assert_eq!(amc_select(lowest / 0.9 * (1.0 - 1e-9), &table, 0.9), None);
    assert_eq!(amc_select(lowest / 0.9 * (1.0 + 1e-9), &table, 0.9), Some(0));
    assert_eq!(amc_select(100.0, &table, 0.9), Some(table.len() - 1));
    for (i, m) in table.entries().iter().enumerate() {
        assert_eq!(amc_select(m.spectral_efficiency() / 0.9 * (1.0 + 1e-9), &table, 0.9), Some(i));
    }
}

#[test]
fn table_loads_from_text() {
    let text = "[[mcs]]\norder = 4\nrate = \"1/2\"\nmin_sinr_db = 1.0\n\n[[mcs]]\norder = 16\nrate = \"3/4\"\nmin_sinr_db = 9.0\n";
    let t = McsTable::from_toml(text).unwrap();
    assert_eq!(t.entries()[1], Mcs { modulation_order: 16, code_rate: CodeRate::new(3, 4).unwrap(), min_sinr_db: 9.0 });
    assert_eq!(t.entries()[1].spectral_efficiency(), 3.0);
    assert!(McsTable::from_toml("[[mcs]]\norder = 8\nrate = \"1/2\"\nmin_sinr_db = 1.0\n").is_err());
    assert!(McsTable::from_toml("nonsense").is_err());
}
