//! Regenerates fixtures/polar_n256.txt: ten payloads for each code size of the default
//! MCS table.
//!
//! cargo run --release -p rsma-phy --example write_fixtures > crates/phy/fixtures/polar_n256.txt

use rsma_core::rng::CounterStream;
use rsma_phy::fixture::{render_fixtures, Fixture};
use rsma_phy::{polar_encode, CodewordSpec, McsTable};

fn main() {
    let mut sizes: Vec<usize> = McsTable::default_table().entries().iter().map(|m| m.payload_bits(256).unwrap()).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let mut fixtures = Vec::new();
    for k in sizes {
        let spec = CodewordSpec::new(256, k, 8).unwrap();
        let mut rng = CounterStream::new(2024, 0x4649_5854, k as u64, 0);
        for _ in 0..10 {
            let payload: Vec<u8> = (0..k).map(|_| rng.bit()).collect();
            let codeword = polar_encode(&spec, &payload).unwrap();
            fixtures.push(Fixture { block_length: 256, payload, codeword });
        }
    }
    print!("{}", render_fixtures(&fixtures));
}
