//! Gray-mapped square QAM with unit average symbol energy.
//!
//! Bits `b0 b1 b2 ...` of a symbol alternate between the in-phase (even positions) and
//! quadrature (odd positions) axes. On one axis with bits `c0 c1 ... c_{m-1}` the
//! amplitude is
//!
//! ```text
//! a = (1 - 2 c0) (2^{m-1} - (1 - 2 c1) (2^{m-2} - ... (1 - 2 c_{m-1}) ... ))
//! ```
//!
//! which is Gray along the axis; the constellation is then scaled by
//! `1 / sqrt(2 (4^m - 1) / 3)`, i.e. `1/sqrt(2)`, `1/sqrt(10)`, `1/sqrt(42)` and
//! `1/sqrt(170)` for 4, 16, 64 and 256 points. For 4-QAM, bits `00` map to
//! `(1 + j) / sqrt(2)`.
//!
//! LLRs are `ln P(b = 0 | y) / P(b = 1 | y)` in max-log form.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QamError {
    #[error("unsupported modulation order {0} (expected 4, 16, 64 or 256)")]
    Order(u32),
    #[error("bit count {bits} is not a multiple of {per_symbol}")]
    Length { bits: usize, per_symbol: usize },
}

/// One square constellation.
#[derive(Debug, Clone, PartialEq)]
pub struct Qam {
    order: u32,
    bits_per_axis: usize,
    /// Normalized axis amplitudes indexed by the axis bit pattern (`c0` most significant).
    levels: Vec<f64>,
}

impl Qam {
    pub fn new(order: u32) -> Result<Self, QamError> {
        let bits_per_axis = match order {
            4 => 1,
            16 => 2,
            64 => 3,
            256 => 4,
            _ => return Err(QamError::Order(order)),
        };
        let scale = (2.0 * ((1u64 << (2 * bits_per_axis)) - 1) as f64 / 3.0).sqrt().recip();
        let levels = (0..1usize << bits_per_axis)
            .map(|pattern| {
                let mut a = 0.0;
                for i in (0..bits_per_axis).rev() {
                    let c = (pattern >> (bits_per_axis - 1 - i)) & 1;
                    let sign = 1.0 - 2.0 * c as f64;
                    a = if i == bits_per_axis - 1 { sign } else { sign * ((1u64 << (bits_per_axis - 1 - i)) as f64 - a) };
                }
                a * scale
            })
            .collect();
        Ok(Self { order, bits_per_axis, levels })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.bits_per_axis
    }

    fn axis_pattern(&self, bits: &[u8], axis: usize) -> usize {
        (0..self.bits_per_axis).fold(0, |acc, i| (acc << 1) | (bits[2 * i + axis] & 1) as usize)
    }

    pub fn map_symbol(&self, bits: &[u8]) -> Complex64 {
        Complex64::new(self.levels[self.axis_pattern(bits, 0)], self.levels[self.axis_pattern(bits, 1)])
    }

    pub fn map(&self, bits: &[u8]) -> Result<Vec<Complex64>, QamError> {
        let q = self.bits_per_symbol();
        if bits.len() % q != 0 {
            return Err(QamError::Length { bits: bits.len(), per_symbol: q });
        }
        Ok(bits.chunks(q).map(|c| self.map_symbol(c)).collect())
    }

    /// Appends the max-log LLRs of one symbol observed as `y = s + n`, `n ~ CN(0, n0)`.
    pub fn demap_symbol(&self, y: Complex64, n0: f64, out: &mut Vec<f64>) {
        let start = out.len();
        out.resize(start + self.bits_per_symbol(), 0.0);
        let m = self.bits_per_axis;
        for (axis, v) in [y.re, y.im].into_iter().enumerate() {
            let mut best = vec![[f64::INFINITY; 2]; m];
            for (pattern, a) in self.levels.iter().enumerate() {
                let d = (v - a) * (v - a);
                for (i, b) in best.iter_mut().enumerate() {
                    let bit = (pattern >> (m - 1 - i)) & 1;
                    if d < b[bit] {
                        b[bit] = d;
                    }
                }
            }
            for (i, b) in best.iter().enumerate() {
                out[start + 2 * i + axis] = (b[1] - b[0]) / n0;
            }
        }
    }

    /// Demaps equalized symbols with one noise-plus-interference variance per symbol.
    pub fn demap_each(&self, symbols: &[Complex64], variances: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(symbols.len() * self.bits_per_symbol());
        for (y, v) in symbols.iter().zip(variances) {
            self.demap_symbol(*y, *v, &mut out);
        }
        out
    }
}

pub fn qam_map(bits: &[u8], order: u32) -> Result<Vec<Complex64>, QamError> {
    Qam::new(order)?.map(bits)
}

/// Max-log LLRs, residual interference treated as Gaussian noise of the given variance.
pub fn qam_demap(symbols: &[Complex64], order: u32, noise_var: f64, interference_var: f64) -> Result<Vec<f64>, QamError> {
    let qam = Qam::new(order)?;
    let n0 = noise_var + interference_var;
    let mut out = Vec::with_capacity(symbols.len() * qam.bits_per_symbol());
    for y in symbols {
        qam.demap_symbol(*y, n0, &mut out);
    }
    Ok(out)
}
