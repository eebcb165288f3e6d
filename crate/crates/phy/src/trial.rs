//! One Monte-Carlo trial of the coded downlink and its bit accounting.

use rsma_core::{ChannelSet, PrecoderSet};
use serde::{Deserialize, Serialize};

use crate::link::{Link, LinkError};
use crate::sic::{sic_receive, ReceiverOptions, StreamAssignment, Transmission, UserDecode};

/// Outcome of one frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub channel_uses: u64,
    /// Information bits credited to each user.
    pub recovered_bits: Vec<u64>,
    /// Information bits addressed to each user.
    pub offered_bits: Vec<u64>,
    pub common_mcs: Option<usize>,
    pub private_mcs: Vec<Option<usize>>,
    /// Per user: CRC flags of the common codewords as decoded by that user.
    pub common_ok: Vec<Vec<bool>>,
    /// Per user: CRC flags of the user's own private codewords.
    pub private_ok: Vec<Vec<bool>>,
    pub sic_stages: Vec<u32>,
}

/// Splits `total` common bits into contiguous per-user shares in proportion to `split`
/// (largest remainder, ties to the lower index). User 0's share comes first.
pub fn common_shares(total: usize, split: &[f64]) -> Vec<usize> {
    let sum: f64 = split.iter().sum();
    if total == 0 || sum <= 0.0 {
        return vec![0; split.len()];
    }
    let exact: Vec<f64> = split.iter().map(|s| s / sum * total as f64).collect();
    let mut shares: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut left = total - shares.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..split.len()).collect();
    order.sort_by(|a, b| {
        let ra = exact[*a] - shares[*a] as f64;
        let rb = exact[*b] - shares[*b] as f64;
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(b))
    });
    for k in order {
        if left == 0 {
            break;
        }
        shares[k] += 1;
        left -= 1;
    }
    shares
}

/// Bits credited to each user: the part of its common share carried by common codewords
/// that user decoded, plus the payload of each of its private codewords that passed.
pub fn credit_bits(common_payload: usize, shares: &[usize], common_ok: &[Vec<bool>], private_payload: &[usize], private_ok: &[Vec<bool>]) -> Vec<u64> {
    let mut start = 0;
    shares
        .iter()
        .enumerate()
        .map(|(k, share)| {
            let (lo, hi) = (start, start + share);
            start = hi;
            let common: usize = common_ok[k]
                .iter()
                .enumerate()
                .filter(|(_, ok)| **ok)
                .map(|(i, _)| {
                    let (a, b) = (i * common_payload, (i + 1) * common_payload);
                    hi.min(b).saturating_sub(lo.max(a))
                })
                .sum();
            let private = private_ok[k].iter().filter(|ok| **ok).count() * private_payload[k];
            (common + private) as u64
        })
        .collect()
}

/// Sends one frame with the given stream assignment and decodes it at every user.
/// Payloads are keyed by `(seed, trial, stream)` and noise by `(seed, trial, user)`.
pub fn run_trial(
    channel: &ChannelSet,
    precoders: &PrecoderSet,
    assignment: &StreamAssignment,
    link: &Link,
    seed: u64,
    trial: u64,
    options: ReceiverOptions,
) -> Result<TrialRecord, LinkError> {
    let users = channel.num_users();
    let tx = Transmission::new(link, assignment, seed, trial)?;
    let decodes: Vec<UserDecode> = (0..users)
        .map(|k| {
            let y = tx.receive(channel, precoders, k, seed, trial);
            sic_receive(k, &y, channel, precoders, &tx, options)
        })
        .collect();

    let (common_payload, common_total) = tx.common.as_ref().map_or((0, 0), |c| (c.codec.payload_bits(), c.codec.payload_bits() * c.payloads.len()));
    let shares = common_shares(common_total, precoders.common_split());
    let private_payload: Vec<usize> = tx.private.iter().map(|f| f.as_ref().map_or(0, |f| f.codec.payload_bits())).collect();
    let private_total: Vec<usize> = tx.private.iter().map(|f| f.as_ref().map_or(0, |f| f.codec.payload_bits() * f.payloads.len())).collect();
    let common_ok: Vec<Vec<bool>> = decodes.iter().map(|d| d.common_ok.clone()).collect();
    let private_ok: Vec<Vec<bool>> = decodes.iter().map(|d| d.private_ok.clone()).collect();
    Ok(TrialRecord {
        trial,
        channel_uses: tx.frame_symbols as u64,
        recovered_bits: credit_bits(common_payload, &shares, &common_ok, &private_payload, &private_ok),
        offered_bits: shares.iter().zip(&private_total).map(|(c, p)| (c + p) as u64).collect(),
        common_mcs: assignment.common,
        private_mcs: assignment.private.clone(),
        common_ok,
        private_ok,
        sic_stages: decodes.iter().map(|d| d.sic_stages).collect(),
    })
}

/// Recovered bits over channel uses.
pub fn throughput(records: &[TrialRecord]) -> f64 {
    let bits: u64 = records.iter().flat_map(|r| &r.recovered_bits).sum();
    let uses: u64 = records.iter().map(|r| r.channel_uses).sum();
    if uses == 0 {
        0.0
    } else {
        bits as f64 / uses as f64
    }
}
