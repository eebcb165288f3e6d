//! Polar codes in natural order, `x = u F^{(x)n}` with `F = [[1, 0], [1, 1]]`, CRC-aided
//! list decoding.
//!
//! LLR sign convention: `llr = ln P(bit = 0) / P(bit = 1)`, so a positive LLR favors 0.

pub mod construct;
mod decoder;

use serde::Serialize;
use thiserror::Error;

use crate::crc::{self, CRC_BITS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolarError {
    #[error("block length {0} must be a power of two between 2 and 32768")]
    BlockLength(usize),
    #[error("information length {info} does not fit block length {block}")]
    InfoLength { info: usize, block: usize },
    #[error("list size must be at least 1")]
    ListSize,
    #[error("expected {expected} input values, got {found}")]
    Length { expected: usize, found: usize },
}

/// Code parameters and frozen set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodewordSpec {
    block_length: usize,
    info_length: usize,
    list_size: usize,
    crc: bool,
    design_snr_db: f64,
    info_positions: Vec<usize>,
    #[serde(skip)]
    frozen: Vec<bool>,
}

/// Design Es/N0 for the frozen-set construction: 2 dB above `10 log10(rate)`.
pub fn default_design_snr_db(info_length: usize, block_length: usize) -> f64 {
    10.0 * (info_length as f64 / block_length as f64).log10() + 2.0
}

impl CodewordSpec {
    /// CRC-aided code carrying `payload_bits` information bits (plus the 11-bit CRC).
    pub fn new(block_length: usize, payload_bits: usize, list_size: usize) -> Result<Self, PolarError> {
        let info = payload_bits + CRC_BITS;
        Self::build(block_length, info, list_size, true, default_design_snr_db(info, block_length))
    }

    pub fn with_design_snr(block_length: usize, payload_bits: usize, list_size: usize, design_snr_db: f64) -> Result<Self, PolarError> {
        Self::build(block_length, payload_bits + CRC_BITS, list_size, true, design_snr_db)
    }

    /// Code without CRC; the decoder then returns the best-metric path. Intended for
    /// short-code conformance checks.
    pub fn without_crc(block_length: usize, info_length: usize, list_size: usize, design_snr_db: f64) -> Result<Self, PolarError> {
        Self::build(block_length, info_length, list_size, false, design_snr_db)
    }

    fn build(block_length: usize, info_length: usize, list_size: usize, crc: bool, design_snr_db: f64) -> Result<Self, PolarError> {
        if !block_length.is_power_of_two() || !(2..=32768).contains(&block_length) {
            return Err(PolarError::BlockLength(block_length));
        }
        if info_length > block_length || info_length == 0 || (crc && info_length <= CRC_BITS) {
            return Err(PolarError::InfoLength { info: info_length, block: block_length });
        }
        if list_size == 0 {
            return Err(PolarError::ListSize);
        }
        let info_positions = construct::information_set(block_length, info_length, design_snr_db);
        let mut frozen = vec![true; block_length];
        for i in &info_positions {
            frozen[*i] = false;
        }
        Ok(Self { block_length, info_length, list_size, crc, design_snr_db, info_positions, frozen })
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    /// Unfrozen positions: payload plus CRC.
    pub fn info_length(&self) -> usize {
        self.info_length
    }

    pub fn payload_length(&self) -> usize {
        if self.crc {
            self.info_length - CRC_BITS
        } else {
            self.info_length
        }
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    pub fn has_crc(&self) -> bool {
        self.crc
    }

    pub fn design_snr_db(&self) -> f64 {
        self.design_snr_db
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn frozen_set(&self) -> Vec<usize> {
        (0..self.block_length).filter(|i| self.frozen[*i]).collect()
    }

    /// Copy with another list size.
    pub fn with_list_size(mut self, list_size: usize) -> Result<Self, PolarError> {
        if list_size == 0 {
            return Err(PolarError::ListSize);
        }
        self.list_size = list_size;
        Ok(self)
    }
}

/// In-place `x = u F^{(x)n}`; the transform is its own inverse.
pub fn polar_transform(bits: &mut [u8]) {
    let n = bits.len();
    let mut half = 1;
    while half < n {
        for start in (0..n).step_by(2 * half) {
            for j in start..start + half {
                bits[j] ^= bits[j + half];
            }
        }
        half *= 2;
    }
}

/// Places `info` on the information positions (zeros elsewhere) and transforms.
pub fn encode_info(spec: &CodewordSpec, info: &[u8]) -> Result<Vec<u8>, PolarError> {
    if info.len() != spec.info_length {
        return Err(PolarError::Length { expected: spec.info_length, found: info.len() });
    }
    let mut u = vec![0u8; spec.block_length];
    for (pos, b) in spec.info_positions.iter().zip(info) {
        u[*pos] = b & 1;
    }
    polar_transform(&mut u);
    Ok(u)
}

/// Appends the CRC (when the spec has one) and encodes.
pub fn polar_encode(spec: &CodewordSpec, payload: &[u8]) -> Result<Vec<u8>, PolarError> {
    if payload.len() != spec.payload_length() {
        return Err(PolarError::Length { expected: spec.payload_length(), found: payload.len() });
    }
    if spec.crc {
        encode_info(spec, &crc::attach(payload))
    } else {
        encode_info(spec, payload)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub payload: Vec<u8>,
    /// CRC result of the returned candidate; always true for specs without CRC.
    pub crc_pass: bool,
    pub codeword: Vec<u8>,
}

fn extract(spec: &CodewordSpec, codeword: &[u8]) -> Vec<u8> {
    let mut u = codeword.to_vec();
    polar_transform(&mut u);
    spec.info_positions.iter().map(|p| u[*p]).collect()
}

/// CRC-aided SCL decoding: the best-metric candidate that passes the CRC, otherwise the
/// best-metric candidate flagged as failed.
pub fn polar_decode(spec: &CodewordSpec, llrs: &[f64]) -> Result<Decoded, PolarError> {
    if llrs.len() != spec.block_length {
        return Err(PolarError::Length { expected: spec.block_length, found: llrs.len() });
    }
    let candidates = decoder::ListDecoder { frozen: &spec.frozen, list_size: spec.list_size }.run(llrs);
    let payload_len = spec.payload_length();
    if spec.crc {
        for (cw, _) in &candidates {
            let info = extract(spec, cw);
            if crc::check(&info) {
                return Ok(Decoded { payload: info[..payload_len].to_vec(), crc_pass: true, codeword: cw.clone() });
            }
        }
    }
    let (cw, _) = &candidates[0];
    let info = extract(spec, cw);
    Ok(Decoded { payload: info[..payload_len].to_vec(), crc_pass: !spec.crc, codeword: cw.clone() })
}

/// Noise-free LLRs (`+magnitude` for 0, `-magnitude` for 1).
pub fn hard_llrs(codeword: &[u8], magnitude: f64) -> Vec<f64> {
    codeword.iter().map(|b| if *b == 0 { magnitude } else { -magnitude }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_is_involution() {
        let mut x: Vec<u8> = (0..64).map(|i| ((i * 7 + 3) % 5 == 0) as u8).collect();
        let orig = x.clone();
        polar_transform(&mut x);
        polar_transform(&mut x);
        assert_eq!(x, orig);
    }

    #[test]
    fn transform_n2_is_kernel() {
        // [u0 ^ u1, u1]
        for (u, x) in [([0u8, 0u8], [0u8, 0u8]), ([1, 0], [1, 0]), ([0, 1], [1, 1]), ([1, 1], [0, 1])] {
            let mut v = u.to_vec();
            polar_transform(&mut v);
            assert_eq!(v, x.to_vec());
        }
    }

    #[test]
    fn zero_payload_gives_zero_codeword() {
        let spec = CodewordSpec::new(256, 100, 8).unwrap();
        assert_eq!(polar_encode(&spec, &[0; 100]).unwrap(), vec![0; 256]);
    }

    #[test]
    fn noiseless_round_trip() {
        let spec = CodewordSpec::new(256, 117, 8).unwrap();
        let payload: Vec<u8> = (0..117).map(|i| ((i * 37 + 11) % 3 == 0) as u8).collect();
        let cw = polar_encode(&spec, &payload).unwrap();
        let d = polar_decode(&spec, &hard_llrs(&cw, 4.0)).unwrap();
        assert!(d.crc_pass);
        assert_eq!(d.payload, payload);
        assert_eq!(d.codeword, cw);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(CodewordSpec::new(100, 10, 8).unwrap_err(), PolarError::BlockLength(100));
        assert!(CodewordSpec::new(16, 6, 8).is_err());
        assert!(CodewordSpec::new(16, 5, 0).is_err());
        let spec = CodewordSpec::new(64, 20, 4).unwrap();
        assert!(polar_encode(&spec, &[0; 19]).is_err());
        assert!(polar_decode(&spec, &[0.0; 63]).is_err());
        assert_eq!(spec.frozen_set().len(), 64 - 31);
    }

    #[test]
    fn zero_llrs_fail_crc() {
        let spec = CodewordSpec::new(256, 100, 8).unwrap();
        let d = polar_decode(&spec, &[0.0; 256]).unwrap();
        // With no information every candidate is the all-zero word, whose CRC passes;
        // a tiny negative bias makes the channel uninformative but not all-zero.
        assert!(d.crc_pass);
        let llrs: Vec<f64> = (0..256).map(|i| if i % 3 == 0 { -1e-3 } else { 1e-3 }).collect();
        let d = polar_decode(&spec, &llrs).unwrap();
        assert!(!d.crc_pass);
    }
}
