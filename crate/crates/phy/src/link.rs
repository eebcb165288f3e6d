//! Frames of polar codewords on one QAM stream.
//!
//! A frame lasts `N / 2` channel uses. A stream with `q` bits per symbol carries `q / 2`
//! codewords per frame; the codeword bits are concatenated and mapped to symbols in
//! order, so every frame has the same length whatever the modulation.

use num_complex::Complex64;
use rsma_core::rng::{domain, CounterStream};
use thiserror::Error;

use crate::amc::{AmcError, Mcs, McsTable};
use crate::polar::{polar_decode, polar_encode, CodewordSpec, Decoded, PolarError};
use crate::qam::Qam;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error(transparent)]
    Amc(#[from] AmcError),
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error("block length {0} is too short for a 256-QAM frame")]
    BlockLength(usize),
    #[error("MCS index {0} out of range")]
    Index(usize),
}

/// One MCS with its code and constellation.
#[derive(Debug, Clone)]
pub struct Codec {
    pub mcs: Mcs,
    pub spec: CodewordSpec,
    pub qam: Qam,
    /// Transmitted bit `t` of a codeword is coded bit `interleaver[t]`.
    interleaver: Vec<usize>,
}

impl Codec {
    pub fn codewords_per_frame(&self) -> usize {
        self.qam.bits_per_symbol() / 2
    }

    pub fn payload_bits(&self) -> usize {
        self.spec.payload_length()
    }

    /// Encodes and interleaves the payloads (one per codeword); returns the transmitted
    /// bits and symbols.
    pub fn modulate(&self, payloads: &[Vec<u8>]) -> Result<(Vec<u8>, Vec<Complex64>), LinkError> {
        let mut bits = Vec::with_capacity(self.spec.block_length() * payloads.len());
        for p in payloads {
            let cw = polar_encode(&self.spec, p)?;
            bits.extend(self.interleaver.iter().map(|i| cw[*i]));
        }
        let symbols = self.qam.map(&bits).map_err(|_| LinkError::BlockLength(self.spec.block_length()))?;
        Ok((bits, symbols))
    }

    /// De-interleaves and decodes a frame of LLRs codeword by codeword.
    pub fn decode(&self, llrs: &[f64]) -> Vec<Decoded> {
        let mut coded = vec![0.0; self.spec.block_length()];
        llrs.chunks(self.spec.block_length())
            .map(|c| {
                for (l, i) in c.iter().zip(&self.interleaver) {
                    coded[*i] = *l;
                }
                polar_decode(&self.spec, &coded).expect("frame LLRs split into whole codewords")
            })
            .collect()
    }

    /// Codewords that contribute bits to symbol `t`.
    pub fn codewords_of_symbol(&self, t: usize) -> std::ops::RangeInclusive<usize> {
        let q = self.qam.bits_per_symbol();
        let n = self.spec.block_length();
        (t * q) / n..=((t + 1) * q - 1) / n
    }
}

/// Codecs for every entry of an MCS table.
#[derive(Debug, Clone)]
pub struct Link {
    table: McsTable,
    codecs: Vec<Codec>,
    block_length: usize,
}

impl Link {
    pub fn new(table: McsTable, block_length: usize, list_size: usize) -> Result<Self, LinkError> {
        if block_length < 8 {
            return Err(LinkError::BlockLength(block_length));
        }
        let mut codecs = Vec::with_capacity(table.len());
        for mcs in table.entries() {
            let payload = mcs.payload_bits(block_length)?;
            let spec = CodewordSpec::new(block_length, payload, list_size)?;
            let qam = Qam::new(mcs.modulation_order).map_err(|_| AmcError::Order(mcs.modulation_order))?;
            codecs.push(Codec { mcs: mcs.clone(), spec, qam, interleaver: interleaver(block_length) });
        }
        Ok(Self { table, codecs, block_length })
    }

    pub fn table(&self) -> &McsTable {
        &self.table
    }

    pub fn codec(&self, index: usize) -> Result<&Codec, LinkError> {
        self.codecs.get(index).ok_or(LinkError::Index(index))
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    /// Channel uses per frame.
    pub fn frame_symbols(&self) -> usize {
        self.block_length / 2
    }
}

/// Fixed pseudo-random permutation spreading each codeword over the constellation's
/// bit levels.
fn interleaver(n: usize) -> Vec<usize> {
    let mut rng = CounterStream::new(0x1bad_5eed, domain::PAYLOAD, u64::MAX, 0);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        perm.swap(i, j);
    }
    perm
}

/// Uniform random payloads for one frame of `codec`, keyed by `(seed, index, stream)`.
pub fn random_payloads(codec: &Codec, seed: u64, index: u64, stream: u64) -> Vec<Vec<u8>> {
    let mut rng = CounterStream::new(seed, domain::PAYLOAD, index, stream);
    (0..codec.codewords_per_frame()).map(|_| (0..codec.payload_bits()).map(|_| rng.bit()).collect()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlerEstimate {
    pub errors: usize,
    pub codewords: usize,
}

impl BlerEstimate {
    pub fn rate(&self) -> f64 {
        self.errors as f64 / self.codewords as f64
    }

    /// Upper end of the one-sided 95% Wilson interval.
    pub fn upper95(&self) -> f64 {
        let n = self.codewords as f64;
        let p = self.rate();
        let z = 1.645;
        let centre = p + z * z / (2.0 * n);
        let spread = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
        (centre + spread) / (1.0 + z * z / n)
    }
}

/// Block error rate on a unit-gain AWGN channel at `es_n0_db`, counting a codeword as
/// failed when the CRC fails or the payload is wrong. Runs whole frames until at least
/// `codewords` blocks have been decoded.
pub fn awgn_bler(codec: &Codec, es_n0_db: f64, codewords: usize, seed: u64) -> BlerEstimate {
    let n0 = 10f64.powf(-es_n0_db / 10.0);
    let mut errors = 0;
    let mut total = 0;
    let mut frame = 0u64;
    while total < codewords {
        let payloads = random_payloads(codec, seed, frame, 0);
        let (_, symbols) = codec.modulate(&payloads).expect("payload sizes come from the codec");
        let mut noise = CounterStream::new(seed, domain::NOISE, frame, 0);
        let mut llrs = Vec::with_capacity(symbols.len() * codec.qam.bits_per_symbol());
        for s in &symbols {
            let (a, b) = noise.complex_normal(n0);
            codec.qam.demap_symbol(s + Complex64::new(a, b), n0, &mut llrs);
        }
        for (d, p) in codec.decode(&llrs).iter().zip(&payloads) {
            total += 1;
            if !d.crc_pass || &d.payload != p {
                errors += 1;
            }
        }
        frame += 1;
    }
    BlerEstimate { errors, codewords: total }
}
