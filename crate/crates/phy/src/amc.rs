//! Modulation and coding schemes and table-driven link adaptation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AmcError {
    #[error("invalid code rate '{0}' (expected a/b with 0 < a < b)")]
    Rate(String),
    #[error("unsupported modulation order {0}")]
    Order(u32),
    #[error("MCS table is empty")]
    Empty,
    #[error("MCS table not sorted: entry {0} does not increase spectral efficiency and threshold")]
    Unsorted(usize),
    #[error("code rate {rate} gives a non-integer payload at block length {block}")]
    Payload { rate: CodeRate, block: usize },
    #[error("cannot parse MCS table: {0}")]
    Parse(String),
}

/// Code rate as a fraction of the block length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeRate {
    pub num: u32,
    pub den: u32,
}

impl CodeRate {
    pub fn new(num: u32, den: u32) -> Result<Self, AmcError> {
        if num == 0 || num >= den {
            return Err(AmcError::Rate(format!("{num}/{den}")));
        }
        Ok(Self { num, den })
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for CodeRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for CodeRate {
    type Err = AmcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AmcError::Rate(s.to_string());
        let (a, b) = s.split_once('/').ok_or_else(bad)?;
        Self::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)
    }
}

impl Serialize for CodeRate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CodeRate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mcs {
    #[serde(rename = "order")]
    pub modulation_order: u32,
    #[serde(rename = "rate")]
    pub code_rate: CodeRate,
    pub min_sinr_db: f64,
}

impl Mcs {
    pub fn bits_per_symbol(&self) -> usize {
        self.modulation_order.trailing_zeros() as usize
    }

    pub fn spectral_efficiency(&self) -> f64 {
        self.bits_per_symbol() as f64 * self.code_rate.value()
    }

    /// Information bits per codeword of `block_length` coded bits.
    pub fn payload_bits(&self, block_length: usize) -> Result<usize, AmcError> {
        let num = self.code_rate.num as usize * block_length;
        if num % self.code_rate.den as usize != 0 {
            return Err(AmcError::Payload { rate: self.code_rate, block: block_length });
        }
        Ok(num / self.code_rate.den as usize)
    }
}

impl fmt::Display for Mcs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-QAM r={}", self.modulation_order, self.code_rate)
    }
}

/// Validated MCS list, ascending in spectral efficiency and threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsTable {
    mcs: Vec<Mcs>,
}

const DEFAULT_TABLE: &str = include_str!("../fixtures/amc_table.toml");

impl McsTable {
    pub fn new(mcs: Vec<Mcs>) -> Result<Self, AmcError> {
        if mcs.is_empty() {
            return Err(AmcError::Empty);
        }
        for m in &mcs {
            if ![4, 16, 64, 256].contains(&m.modulation_order) {
                return Err(AmcError::Order(m.modulation_order));
            }
        }
        for (i, w) in mcs.windows(2).enumerate() {
            if w[1].spectral_efficiency() <= w[0].spectral_efficiency() || w[1].min_sinr_db <= w[0].min_sinr_db {
                return Err(AmcError::Unsorted(i + 1));
            }
        }
        Ok(Self { mcs })
    }

    pub fn from_toml(text: &str) -> Result<Self, AmcError> {
        let raw: McsTable = toml::from_str(text).map_err(|e| AmcError::Parse(e.to_string()))?;
        Self::new(raw.mcs)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("MCS table serializes")
    }

    /// Built-in table for 256-bit codewords with thresholds from AWGN calibration.
    pub fn default_table() -> Self {
        Self::from_toml(DEFAULT_TABLE).expect("built-in MCS table is valid")
    }

    pub fn entries(&self) -> &[Mcs] {
        &self.mcs
    }

    pub fn len(&self) -> usize {
        self.mcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mcs.is_empty()
    }

    /// Checks that every entry yields an integer payload at `block_length`.
    pub fn check_block_length(&self, block_length: usize) -> Result<(), AmcError> {
        self.mcs.iter().try_for_each(|m| m.payload_bits(block_length).map(|_| ()))
    }
}

pub const DEFAULT_BACKOFF: f64 = 0.9;

/// Index of the highest-efficiency entry with `spectral_efficiency <= backoff * rate`,
/// `None` for no transmission.
pub fn amc_select(predicted_rate: f64, table: &McsTable, backoff: f64) -> Option<usize> {
    let budget = backoff * predicted_rate;
    if !(budget > 0.0) {
        return None;
    }
    table.mcs.iter().rposition(|m| m.spectral_efficiency() <= budget)
}

/// Index maximizing expected goodput `spectral_efficiency * P(sinr >= threshold)` over
/// equally likely SINR draws (linear), `None` when no entry ever clears its threshold.
/// Ties go to the lower index.
pub fn amc_select_goodput(sinr_draws: &[f64], table: &McsTable) -> Option<usize> {
    if sinr_draws.is_empty() {
        return None;
    }
    let db: Vec<f64> = sinr_draws.iter().map(|s| 10.0 * s.log10()).collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, m) in table.mcs.iter().enumerate() {
        let hits = db.iter().filter(|d| **d >= m.min_sinr_db).count();
        let goodput = m.spectral_efficiency() * hits as f64;
        if hits > 0 && best.is_none_or(|(_, g)| goodput > g) {
            best = Some((i, goodput));
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_parsing() {
        assert_eq!("40/256".parse::<CodeRate>().unwrap(), CodeRate { num: 40, den: 256 });
        assert!("256/256".parse::<CodeRate>().is_err());
        assert!("x".parse::<CodeRate>().is_err());
    }

    #[test]
    fn default_table_round_trips() {
        let t = McsTable::default_table();
        assert_eq!(McsTable::from_toml(&t.to_toml()).unwrap(), t);
        t.check_block_length(256).unwrap();
    }

    #[test]
    fn goodput_rule() {
        let t = McsTable::default_table();
        assert_eq!(amc_select_goodput(&[], &t), None);
        assert_eq!(amc_select_goodput(&[1e-3; 4], &t), None);
        // Every draw far above the top threshold: top entry.
        assert_eq!(amc_select_goodput(&[1e4; 4], &t), Some(t.len() - 1));
        // One good draw out of ten does not justify the top entry over a safe one.
        let lin = |db: f64| 10f64.powf(db / 10.0);
        let mut draws = vec![lin(t.entries()[3].min_sinr_db + 0.01); 9];
        draws.push(lin(40.0));
        assert_eq!(amc_select_goodput(&draws, &t), Some(3));
    }

    #[test]
    fn rejects_unsorted() {
        let m = |o, n, s| Mcs { modulation_order: o, code_rate: CodeRate::new(n, 256).unwrap(), min_sinr_db: s };
        assert!(McsTable::new(vec![m(4, 64, 1.0), m(4, 40, 2.0)]).is_err());
        assert!(McsTable::new(vec![m(4, 40, 1.0), m(4, 64, 1.0)]).is_err());
        assert!(McsTable::new(vec![m(8, 40, 1.0)]).is_err());
        assert!(McsTable::new(vec![]).is_err());
    }
}
