use rsma_core::rng::CounterStream;
use rsma_phy::crc;
use rsma_phy::fixture::{check_fixtures, parse_fixtures, DEFAULT_FIXTURES};
use rsma_phy::polar::{encode_info, hard_llrs, polar_decode, polar_encode, CodewordSpec};

fn random_bits(rng: &mut CounterStream, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.bit()).collect()
}

/// Rows of the n-fold Kronecker power of [[1,0],[1,1]], built from the definition
/// G[i][j] = 1 iff the bits of j are a subset of the bits of i.
fn kronecker_rows(n: usize) -> Vec<Vec<u8>> {
    (0..n).map(|i| (0..n).map(|j| u8::from(i & j == j)).collect()).collect()
}

fn oracle_encode(rows: &[Vec<u8>], positions: &[usize], info: &[u8]) -> Vec<u8> {
    let n = rows.len();
    let mut x = vec![0u8; n];
    for (p, b) in positions.iter().zip(info) {
        if *b == 1 {
            for j in 0..n {
                x[j] ^= rows[*p][j];
            }
        }
    }
    x
}

fn weight(x: &[u8]) -> usize {
    x.iter().filter(|b| **b == 1).count()
}

#[test]
fn noiseless_round_trip_100_payloads() {
    let mut rng = CounterStream::new(11, 1, 0, 0);
    for k in [40usize, 96, 128, 176, 216] {
        let spec = CodewordSpec::new(256, k, 8).unwrap();
        for _ in 0..20 {
            let payload = random_bits(&mut rng, k);
            let cw = polar_encode(&spec, &payload).unwrap();
            let d = polar_decode(&spec, &hard_llrs(&cw, 3.0)).unwrap();
            assert!(d.crc_pass);
            assert_eq!(d.payload, payload);
        }
    }
}

#[test]
fn encoder_matches_generator_matrix_at_n16() {
    let spec = CodewordSpec::without_crc(16, 8, 16, 2.0).unwrap();
    let rows = kronecker_rows(16);
    for m in 0..256u32 {
        let info: Vec<u8> = (0..8).map(|i| ((m >> i) & 1) as u8).collect();
        assert_eq!(encode_info(&spec, &info).unwrap(), oracle_encode(&rows, spec.info_positions(), &info));
    }
}

#[test]
fn encoder_is_linear_exhaustively_at_n16() {
    let spec = CodewordSpec::without_crc(16, 8, 16, 2.0).unwrap();
    let words: Vec<Vec<u8>> = (0..256u32).map(|m| encode_info(&spec, &(0..8).map(|i| ((m >> i) & 1) as u8).collect::<Vec<_>>()).unwrap()).collect();
    for a in 0..256usize {
        for b in 0..256usize {
            let sum: Vec<u8> = words[a].iter().zip(&words[b]).map(|(x, y)| x ^ y).collect();
            assert_eq!(sum, words[a ^ b]);
        }
    }
}

#[test]
fn single_bit_payload_changes_move_at_least_dmin_bits() {
    // CRC-aided N=16 code with 4 payload bits: exhaustive minimum weight over all
    // nonzero payloads through the oracle encoder, then every single-bit change.
    let spec = CodewordSpec::new(16, 4, 8).unwrap();
    let rows = kronecker_rows(16);
    let encode = |m: u32| {
        let payload: Vec<u8> = (0..4).map(|i| ((m >> i) & 1) as u8).collect();
        let mut info = payload.clone();
        info.extend(crc::crc11(&payload));
        oracle_encode(&rows, spec.info_positions(), &info)
    };
    let dmin = (1..16u32).map(|m| weight(&encode(m))).min().unwrap();
    assert!(dmin >= 1);
    for m in 0..16u32 {
        let payload: Vec<u8> = (0..4).map(|i| ((m >> i) & 1) as u8).collect();
        let a = polar_encode(&spec, &payload).unwrap();
        assert_eq!(a, encode(m));
        for bit in 0..4 {
            let b = polar_encode(&spec, &(0..4).map(|i| ((m ^ (1 << bit)) >> i & 1) as u8).collect::<Vec<_>>()).unwrap();
            let d = a.iter().zip(&b).filter(|(x, y)| x != y).count();
            assert!(d >= dmin, "distance {d} below d_min {dmin}");
        }
    }
    // Without CRC the minimum distance of a polar code is its lightest information row.
    let plain = CodewordSpec::without_crc(16, 8, 16, 2.0).unwrap();
    let exhaustive =
        (1..256u32).map(|m| weight(&oracle_encode(&rows, plain.info_positions(), &(0..8).map(|i| ((m >> i) & 1) as u8).collect::<Vec<_>>()))).min().unwrap();
    let lightest = plain.info_positions().iter().map(|p| weight(&rows[*p])).min().unwrap();
    assert_eq!(exhaustive, lightest);
}

#[test]
fn list_decoder_matches_exhaustive_ml_at_n16() {
    let spec = CodewordSpec::without_crc(16, 8, 16, 2.0).unwrap();
    let rows = kronecker_rows(16);
    let book: Vec<Vec<u8>> =
        (0..256u32).map(|m| oracle_encode(&rows, spec.info_positions(), &(0..8).map(|i| ((m >> i) & 1) as u8).collect::<Vec<_>>())).collect();
    // BPSK (0 -> +1) at Es/N0 = 1 dB.
    let n0 = 10f64.powf(-0.1);
    let mut agree = 0;
    let mut wrong = 0;
    let trials = 500;
    for t in 0..trials {
        let mut rng = CounterStream::new(5, 2, t, 0);
        let sent = &book[(rng.next_u64() % 256) as usize];
        let llrs: Vec<f64> = sent
            .iter()
            .map(|b| {
                let (w, _) = rng.complex_normal(n0);
                let y = 1.0 - 2.0 * *b as f64 + w;
                4.0 * y / n0
            })
            .collect();
        let corr = |c: &Vec<u8>| c.iter().zip(&llrs).map(|(b, l)| if *b == 0 { *l } else { -*l }).sum::<f64>();
        let ml = book.iter().max_by(|a, b| corr(a).partial_cmp(&corr(b)).unwrap()).unwrap();
        let d = polar_decode(&spec, &llrs).unwrap();
        if &d.codeword == ml {
            agree += 1;
        }
        if &d.codeword != sent {
            wrong += 1;
        }
    }
    assert!(wrong > 0, "channel too clean to exercise the decoder");
    assert!(agree as f64 >= 0.99 * trials as f64, "agreement {agree}/{trials}");
}

#[test]
fn all_zero_llrs_give_a_decision() {
    for k in [40usize, 128] {
        let spec = CodewordSpec::new(256, k, 8).unwrap();
        let d = polar_decode(&spec, &[0.0; 256]).unwrap();
        assert_eq!(d.payload.len(), k);
    }
}

#[test]
fn shipped_fixtures_conform() {
    let fx = parse_fixtures(DEFAULT_FIXTURES).unwrap();
    assert_eq!(fx.len(), 130);
    let report = check_fixtures(&fx, 8).unwrap();
    assert!(report.passed(), "{report:?}");
}

#[test]
fn corrupted_fixture_is_reported() {
    let mut fx = parse_fixtures(DEFAULT_FIXTURES).unwrap();
    fx.truncate(3);
    fx[1].codeword[0] ^= 1;
    let report = check_fixtures(&fx, 8).unwrap();
    assert_eq!(report.encode_mismatches, 1);
    assert!(parse_fixtures("256 3 012 0").is_err());
}
