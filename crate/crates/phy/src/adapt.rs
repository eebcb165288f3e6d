//! Joint link adaptation over conditional CSIT draws.
//!
//! For each draw the receivers are modelled as in [`crate::sic`]: user `k` decodes the
//! common stream if its SINR clears the MCS threshold, removes it on success, and then
//! decodes its private stream against the remaining interference. The predicted goodput
//! of an assignment is the mean credited spectral efficiency over the draws (common
//! stream credited to each user in proportion to its split). Stream MCSs are chosen by
//! coordinate ascent on that prediction.

use rsma_core::linalg::inner;
use rsma_core::{ChannelSet, PrecoderSet};

use crate::amc::{amc_select_goodput, McsTable};
use crate::sic::StreamAssignment;

/// Received powers of every stream at every user for one draw.
#[derive(Debug, Clone)]
pub struct DrawGains {
    /// `|h_k^H p_c|^2` per user.
    pub common: Vec<f64>,
    /// `|h_k^H p_i|^2`, indexed `[user][stream]`.
    pub private: Vec<Vec<f64>>,
    pub noise: Vec<f64>,
}

impl DrawGains {
    pub fn new(draw: &ChannelSet, precoders: &PrecoderSet) -> Self {
        let users = precoders.num_users();
        let mut common = Vec::with_capacity(users);
        let mut private = Vec::with_capacity(users);
        for k in 0..users {
            let h = draw.channel(k);
            common.push(inner(h, precoders.common()).norm_sqr());
            private.push((0..users).map(|i| inner(h, precoders.private(i)).norm_sqr()).collect());
        }
        Self { common, private, noise: draw.noise_vars().to_vec() }
    }
}

fn active_interference(d: &DrawGains, user: usize, active: &[bool]) -> f64 {
    d.private[user].iter().zip(&active[1..]).filter(|(_, on)| **on).map(|(g, _)| g).sum()
}

fn clears(signal: f64, rest: f64, threshold_db: f64) -> bool {
    signal > 0.0 && 10.0 * (signal / rest).log10() >= threshold_db
}

/// Mean credited bits per channel use over `draws` for `assignment`.
pub fn predicted_goodput(draws: &[DrawGains], split: &[f64], assignment: &StreamAssignment, table: &McsTable) -> f64 {
    let entries = table.entries();
    let mut total = 0.0;
    for d in draws {
        let private_on: Vec<bool> = assignment.private.iter().map(|a| a.is_some()).collect();
        for k in 0..d.common.len() {
            let interference: f64 = d.private[k].iter().zip(&private_on).filter(|(_, on)| **on).map(|(g, _)| g).sum();
            let mut common_left = 0.0;
            if let Some(c) = assignment.common {
                let m = &entries[c];
                if clears(d.common[k], interference + d.noise[k], m.min_sinr_db) {
                    total += split[k] * m.spectral_efficiency();
                } else {
                    common_left = d.common[k];
                }
            }
            if let Some(p) = assignment.private[k] {
                let m = &entries[p];
                let own = d.private[k][k];
                if clears(own, interference - own + common_left + d.noise[k], m.min_sinr_db) {
                    total += m.spectral_efficiency();
                }
            }
        }
    }
    total / draws.len().max(1) as f64
}

/// Per-stream goodput choices with every active stream on and perfect cancellation,
/// refined by coordinate ascent over per-stream MCS choices (silent included). Streams
/// with zero precoders, and a common stream nobody is credited for, stay silent.
pub fn plan_streams(draws: &[ChannelSet], precoders: &PrecoderSet, table: &McsTable) -> (StreamAssignment, f64) {
    let gains: Vec<DrawGains> = draws.iter().map(|d| DrawGains::new(d, precoders)).collect();
    let split = precoders.common_split();
    let users = precoders.num_users();
    // Slot 0 is the common stream, slot k + 1 the private stream of user k.
    let active: Vec<bool> = std::iter::once(precoders.has_common() && split.iter().any(|s| *s > 0.0))
        .chain((0..users).map(|k| precoders.private(k).iter().any(|z| z.norm_sqr() > 0.0)))
        .collect();
    let mut a = StreamAssignment::silent(users);
    if active[0] {
        let sinrs: Vec<f64> =
            gains.iter().map(|d| (0..users).map(|k| d.common[k] / (active_interference(d, k, &active) + d.noise[k])).fold(f64::INFINITY, f64::min)).collect();
        a.common = amc_select_goodput(&sinrs, table);
    }
    for k in 0..users {
        if active[k + 1] {
            let sinrs: Vec<f64> = gains.iter().map(|d| d.private[k][k] / (active_interference(d, k, &active) - d.private[k][k] + d.noise[k])).collect();
            a.private[k] = amc_select_goodput(&sinrs, table);
        }
    }
    let mut best = predicted_goodput(&gains, split, &a, table);
    let options: Vec<Option<usize>> = std::iter::once(None).chain((0..table.len()).map(Some)).collect();
    for _ in 0..4 {
        let mut improved = false;
        for (slot, on) in active.iter().enumerate() {
            if !on {
                continue;
            }
            for o in &options {
                let mut trial = a.clone();
                if slot == 0 {
                    trial.common = *o;
                } else {
                    trial.private[slot - 1] = *o;
                }
                let g = predicted_goodput(&gains, split, &trial, table);
                if g > best + 1e-12 {
                    best = g;
                    a = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    (a, best)
}
