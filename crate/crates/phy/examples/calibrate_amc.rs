//! Finds, for every MCS of the built-in table, the AWGN Es/N0 at which the block error
//! rate falls to a target, and prints a table in the configuration-file format.
//!
//! cargo run --release -p rsma-phy --example calibrate_amc -- [target] [codewords]

use rsma_phy::link::awgn_bler;
use rsma_phy::{Link, McsTable};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let target: f64 = args.get(1).map_or(3e-3, |a| a.parse().expect("target BLER"));
    let codewords: usize = args.get(2).map_or(4000, |a| a.parse().expect("codeword count"));
    let link = Link::new(McsTable::default_table(), 256, 8).expect("default link");
    let mut out = McsTable::default_table().entries().to_vec();
    for (i, mcs) in out.iter_mut().enumerate() {
        let codec = link.codec(i).unwrap();
        let (mut lo, mut hi) = (-10.0, 35.0);
        while hi - lo > 0.05 {
            let mid = 0.5 * (lo + hi);
            if awgn_bler(codec, mid, codewords, 1000 + i as u64).rate() <= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        mcs.min_sinr_db = (hi * 10.0f64).ceil() / 10.0;
        let check = awgn_bler(codec, mcs.min_sinr_db, 10_000, 7);
        eprintln!("{mcs}: {:.1} dB, BLER {:.4} (10^4 check)", mcs.min_sinr_db, check.rate());
    }
    print!("{}", McsTable::new(out).expect("thresholds increase").to_toml());
}
