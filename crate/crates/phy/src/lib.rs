//! Coded link-level chain for the multi-antenna downlink: CRC-aided polar codes, Gray
//! QAM, table-driven AMC and SIC reception of superposed common and private streams.

pub mod adapt;
pub mod amc;
pub mod crc;
pub mod fixture;
pub mod link;
pub mod polar;
pub mod qam;
pub mod sic;
pub mod trial;

pub use adapt::{plan_streams, predicted_goodput, DrawGains};
pub use amc::{amc_select, amc_select_goodput, CodeRate, Mcs, McsTable, DEFAULT_BACKOFF};
pub use link::{awgn_bler, BlerEstimate, Codec, Link, LinkError};
pub use polar::{polar_decode, polar_encode, CodewordSpec, Decoded, PolarError};
pub use qam::{qam_demap, qam_map, Qam, QamError};
pub use sic::{sic_receive, ReceiverOptions, StreamAssignment, Transmission, UserDecode};
pub use trial::{common_shares, credit_bits, run_trial, throughput, TrialRecord};
