//! Superposed transmission of one frame and per-user SIC reception.
//!
//! Every user first decodes the common stream with all private streams as interference.
//! A user that also has a private stream then runs one cancellation stage: symbols whose
//! common codewords all passed their CRC are re-encoded, re-modulated and subtracted, and
//! the private stream is decoded against whatever common power is left. Failed common
//! codewords therefore leave their symbols in place rather than stopping the receiver.
//!
//! Receivers know their own true channel and every precoder, so the Gaussian
//! interference variance fed to the demapper is exact.

use num_complex::Complex64;
use rsma_core::linalg::inner;
use rsma_core::rng::{domain, CounterStream};
use rsma_core::{received_sample, transmit_signal, ChannelSet, PrecoderSet};
use serde::{Deserialize, Serialize};

use crate::amc::{amc_select, McsTable};
use crate::link::{random_payloads, Codec, Link, LinkError};

/// MCS index per stream; `None` leaves the stream silent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamAssignment {
    pub common: Option<usize>,
    pub private: Vec<Option<usize>>,
}

impl StreamAssignment {
    /// Table-driven link adaptation on predicted per-stream rates; streams whose
    /// precoder is zero stay silent.
    pub fn from_rates(precoders: &PrecoderSet, common_rate: f64, private_rates: &[f64], table: &McsTable, backoff: f64) -> Self {
        let common = if precoders.has_common() { amc_select(common_rate, table, backoff) } else { None };
        let private = private_rates
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let active = precoders.private(k).iter().any(|z| z.norm_sqr() > 0.0);
                if active {
                    amc_select(*r, table, backoff)
                } else {
                    None
                }
            })
            .collect();
        Self { common, private }
    }

    pub fn silent(users: usize) -> Self {
        Self { common: None, private: vec![None; users] }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReceiverOptions {
    /// Remove the true common symbols regardless of decoding (reference receiver).
    pub genie_common_removal: bool,
}

/// One stream's frame as sent.
#[derive(Debug, Clone)]
pub struct StreamFrame<'a> {
    pub codec: &'a Codec,
    pub payloads: Vec<Vec<u8>>,
    pub symbols: Vec<Complex64>,
}

/// Everything put on the air in one frame.
#[derive(Debug, Clone)]
pub struct Transmission<'a> {
    pub common: Option<StreamFrame<'a>>,
    pub private: Vec<Option<StreamFrame<'a>>>,
    pub frame_symbols: usize,
}

fn stream_frame<'a>(link: &'a Link, index: Option<usize>, seed: u64, trial: u64, stream: u64) -> Result<Option<StreamFrame<'a>>, LinkError> {
    let Some(i) = index else { return Ok(None) };
    let codec = link.codec(i)?;
    let payloads = random_payloads(codec, seed, trial, stream);
    let (_, symbols) = codec.modulate(&payloads)?;
    Ok(Some(StreamFrame { codec, payloads, symbols }))
}

impl<'a> Transmission<'a> {
    /// Draws payloads (common stream 0, private stream `k` is `k + 1`) and modulates.
    pub fn new(link: &'a Link, assignment: &StreamAssignment, seed: u64, trial: u64) -> Result<Self, LinkError> {
        let common = stream_frame(link, assignment.common, seed, trial, 0)?;
        let private = assignment.private.iter().enumerate().map(|(k, a)| stream_frame(link, *a, seed, trial, k as u64 + 1)).collect::<Result<_, _>>()?;
        Ok(Self { common, private, frame_symbols: link.frame_symbols() })
    }

    fn symbol(frame: &Option<StreamFrame<'_>>, t: usize) -> Complex64 {
        frame.as_ref().map_or(Complex64::new(0.0, 0.0), |f| f.symbols[t])
    }

    /// Received samples of `user` over the frame, noise keyed by `(seed, trial, user)`.
    pub fn receive(&self, channel: &ChannelSet, precoders: &PrecoderSet, user: usize, seed: u64, trial: u64) -> Vec<Complex64> {
        let noise_var = channel.noise_vars()[user];
        let mut noise = CounterStream::new(seed, domain::NOISE, trial, user as u64 + 1);
        let mut streams = Vec::with_capacity(self.private.len() + 1);
        (0..self.frame_symbols)
            .map(|t| {
                streams.clear();
                streams.push(Self::symbol(&self.common, t));
                streams.extend(self.private.iter().map(|f| Self::symbol(f, t)));
                let x = transmit_signal(precoders, &streams).expect("one symbol per stream");
                let (a, b) = noise.complex_normal(noise_var);
                received_sample(channel, user, &x, Complex64::new(a, b)).expect("user index in range")
            })
            .collect()
    }
}

/// Decoding outcome of one user.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserDecode {
    /// CRC flag per common codeword (empty when no common stream was sent).
    pub common_ok: Vec<bool>,
    pub common_payloads: Vec<Vec<u8>>,
    /// CRC flag per own private codeword (empty when none was sent).
    pub private_ok: Vec<bool>,
    pub private_payloads: Vec<Vec<u8>>,
    /// Cancellation stages run (0 or 1).
    pub sic_stages: u32,
    /// Symbols from which the common contribution was removed.
    pub cancelled_symbols: usize,
}

fn demap(codec: &Codec, samples: &[Complex64], gain: Complex64, variances: &[f64]) -> Vec<f64> {
    let g2 = gain.norm_sqr();
    if g2 <= f64::MIN_POSITIVE {
        return vec![0.0; samples.len() * codec.qam.bits_per_symbol()];
    }
    let eq: Vec<Complex64> = samples.iter().map(|y| y / gain).collect();
    let n0: Vec<f64> = variances.iter().map(|v| v / g2).collect();
    codec.qam.demap_each(&eq, &n0)
}

/// Receiver of `user` for the frame `tx`, given its samples.
pub fn sic_receive(
    user: usize,
    samples: &[Complex64],
    channel: &ChannelSet,
    precoders: &PrecoderSet,
    tx: &Transmission<'_>,
    options: ReceiverOptions,
) -> UserDecode {
    let h = channel.channel(user);
    let noise = channel.noise_vars()[user];
    let gain_c = inner(h, precoders.common());
    let gains: Vec<Complex64> = (0..precoders.num_users()).map(|i| inner(h, precoders.private(i))).collect();
    let private_power: f64 = tx.private.iter().zip(&gains).filter(|(f, _)| f.is_some()).map(|(_, g)| g.norm_sqr()).sum();
    let own = tx.private[user].as_ref();
    let mut out = UserDecode::default();
    let mut residual = samples.to_vec();
    let mut common_left = vec![false; samples.len()];

    if let Some(common) = &tx.common {
        let var = vec![private_power + noise; samples.len()];
        let decoded = common.codec.decode(&demap(common.codec, samples, gain_c, &var));
        out.common_ok = decoded.iter().map(|d| d.crc_pass).collect();
        out.common_payloads = decoded.iter().map(|d| d.payload.clone()).collect();
        common_left.iter_mut().for_each(|c| *c = true);
        if own.is_some() {
            out.sic_stages = 1;
            let rebuilt = if options.genie_common_removal {
                common.symbols.clone()
            } else {
                let payloads: Vec<Vec<u8>> = decoded.iter().map(|d| d.payload.clone()).collect();
                common.codec.modulate(&payloads).expect("decoded payloads have codec sizes").1
            };
            for (t, y) in residual.iter_mut().enumerate() {
                let clean = options.genie_common_removal || common.codec.codewords_of_symbol(t).all(|i| out.common_ok[i]);
                if clean {
                    *y -= gain_c * rebuilt[t];
                    common_left[t] = false;
                    out.cancelled_symbols += 1;
                }
            }
        }
    }

    if let Some(own) = own {
        let base = private_power - gains[user].norm_sqr() + noise;
        let var: Vec<f64> = common_left.iter().map(|left| if *left { base + gain_c.norm_sqr() } else { base }).collect();
        let decoded = own.codec.decode(&demap(own.codec, &residual, gains[user], &var));
        out.private_ok = decoded.iter().map(|d| d.crc_pass).collect();
        out.private_payloads = decoded.into_iter().map(|d| d.payload).collect();
    }
    out
}
