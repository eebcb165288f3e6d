//! Text fixtures of `(payload, codeword)` pairs for codec conformance.
//!
//! One pair per line: `N payload_bits payload codeword`, bits written as `0`/`1`
//! strings. Blank lines and lines starting with `#` are ignored. The codes are the
//! CRC-aided default constructions (`CodewordSpec::new`).

use std::fmt::Write;

use thiserror::Error;

use crate::polar::{hard_llrs, polar_decode, polar_encode, CodewordSpec, PolarError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixture {
    pub block_length: usize,
    pub payload: Vec<u8>,
    pub codeword: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FixtureError {
    #[error("fixture line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("fixture line {line}: {source}")]
    Code { line: usize, source: PolarError },
}

pub const DEFAULT_FIXTURES: &str = include_str!("../fixtures/polar_n256.txt");

fn bits(s: &str) -> Option<Vec<u8>> {
    s.bytes()
        .map(|b| match b {
            b'0' => Some(0),
            b'1' => Some(1),
            _ => None,
        })
        .collect()
}

pub fn parse_fixtures(text: &str) -> Result<Vec<Fixture>, FixtureError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: &str| FixtureError::Parse { line: i + 1, reason: reason.into() };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [n, k, payload, codeword] = fields[..] else { return Err(err("expected 4 fields")) };
        let n: usize = n.parse().map_err(|_| err("bad block length"))?;
        let k: usize = k.parse().map_err(|_| err("bad payload length"))?;
        let payload = bits(payload).ok_or_else(|| err("payload is not a bit string"))?;
        let codeword = bits(codeword).ok_or_else(|| err("codeword is not a bit string"))?;
        if payload.len() != k || codeword.len() != n {
            return Err(err("length does not match header fields"));
        }
        out.push(Fixture { block_length: n, payload, codeword });
    }
    Ok(out)
}

pub fn format_fixture(f: &Fixture) -> String {
    let mut s = format!("{} {} ", f.block_length, f.payload.len());
    f.payload.iter().for_each(|b| s.push(char::from(b'0' + b)));
    s.push(' ');
    f.codeword.iter().for_each(|b| s.push(char::from(b'0' + b)));
    s
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FixtureReport {
    pub checked: usize,
    pub encode_mismatches: usize,
    pub decode_failures: usize,
}

impl FixtureReport {
    pub fn passed(&self) -> bool {
        self.checked > 0 && self.encode_mismatches == 0 && self.decode_failures == 0
    }
}

/// Re-encodes every payload and decodes every codeword from noiseless LLRs.
pub fn check_fixtures(fixtures: &[Fixture], list_size: usize) -> Result<FixtureReport, FixtureError> {
    let mut report = FixtureReport::default();
    for (line, f) in fixtures.iter().enumerate() {
        let spec = CodewordSpec::new(f.block_length, f.payload.len(), list_size).map_err(|source| FixtureError::Code { line, source })?;
        let cw = polar_encode(&spec, &f.payload).map_err(|source| FixtureError::Code { line, source })?;
        if cw != f.codeword {
            report.encode_mismatches += 1;
        }
        let d = polar_decode(&spec, &hard_llrs(&f.codeword, 8.0)).map_err(|source| FixtureError::Code { line, source })?;
        if !d.crc_pass || d.payload != f.payload {
            report.decode_failures += 1;
        }
        report.checked += 1;
    }
    Ok(report)
}

/// Renders a fixture file body.
pub fn render_fixtures(fixtures: &[Fixture]) -> String {
    let mut s = String::from("# N payload_bits payload codeword\n");
    for f in fixtures {
        let _ = writeln!(s, "{}", format_fixture(f));
    }
    s
}
