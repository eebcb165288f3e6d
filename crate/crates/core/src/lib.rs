//! Rate model, CSIT error generation and sum-rate precoder optimization for the
//! multi-antenna broadcast channel with rate splitting (RSMA), linear precoding (SDMA)
//! and two-user NOMA.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the unsuffixed type
//! names default to `f64` and the `*32` aliases below name the single-precision forms.

pub mod csit;
pub mod dof;
pub mod linalg;
pub mod model;
pub mod precoder;
pub mod rng;
mod scalar;

pub use csit::{conditional_draws, draw_block, error_variance, CsitConfig, CsitError, DrawPurpose};
pub use dof::{dof_slope, predicted_dof_rsma, predicted_dof_sdma};
pub use model::{
    averaged_rate_report, log2_1p, rate_report, received_sample, sinr_common, sinr_private, transmit_signal, Averaging, ChannelSet, ModelError, PrecoderSet,
    RateReport, ReportMeta, Semantics,
};
pub use precoder::{
    averaged_noma_rates, decoding_order_from_estimate, noma_precoders, noma_rates, optimize, optimize_from, optimize_with_warm_starts, sum_rate_objective,
    OptimizeError, Optimized, OptimizerSettings, QosOutcome, Strategy, StrategyKind, TraceStage,
};
pub use scalar::{Cx, Scalar};

pub type ChannelSet32 = ChannelSet<f32>;
pub type PrecoderSet32 = PrecoderSet<f32>;
pub type RateReport32 = RateReport<f32>;
pub type Optimized32 = Optimized<f32>;
