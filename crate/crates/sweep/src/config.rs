//! Experiment configuration: a TOML key/value file, command-line overrides and the
//! configuration fingerprint.
//!
//! ```toml
//! strategies = ["rsma", "sdma", "noma"]
//! snr_db = [0, 5, 10, 15, 20, 25, 30, 35]
//! alpha = 0.6
//! users = 2
//! antennas = 2
//! r0 = 0.0
//! trials = 200
//! seed = 1
//! mode = "lls"
//! output = "fig2.csv"
//! ```
//!
//! Every other key has a default; unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rsma_core::StrategyKind;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Parse(String),
    #[error("override '{0}' is not of the form key=value")]
    Override(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Ergodic sum-rates only.
    Shannon,
    /// Coded link-level throughput (and sum-rates).
    Lls,
    /// Sum-rates on a high-SNR grid plus slope fits.
    Dof,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Shannon => "shannon",
            Mode::Lls => "lls",
            Mode::Dof => "dof",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Mode::Lls => 200,
            Mode::Shannon | Mode::Dof => 500,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "shannon" => Ok(Mode::Shannon),
            "lls" => Ok(Mode::Lls),
            "dof" => Ok(Mode::Dof),
            _ => Err(format!("unknown mode '{s}' (expected shannon, lls or dof)")),
        }
    }
}

/// How the coded chain picks an MCS per stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmcRule {
    /// Maximize spectral efficiency times the share of conditional CSIT draws whose
    /// SINR clears the MCS threshold.
    Goodput,
    /// Highest spectral efficiency within `backoff` times the optimizer's predicted rate.
    Rate,
}

fn default_amc_rule() -> AmcRule {
    AmcRule::Goodput
}

fn default_strategies() -> Vec<StrategyKind> {
    StrategyKind::ALL.to_vec()
}
fn default_grid() -> Vec<f64> {
    (0..8).map(|i| 5.0 * i as f64).collect()
}
fn default_alpha() -> f64 {
    0.6
}
fn two() -> usize {
    2
}
fn default_seed() -> u64 {
    1
}
fn default_mode() -> Mode {
    Mode::Lls
}
fn default_output() -> PathBuf {
    PathBuf::from("results.csv")
}
fn default_conditional() -> usize {
    64
}
fn default_eval() -> usize {
    256
}
fn default_backoff() -> f64 {
    rsma_phy::DEFAULT_BACKOFF
}
fn default_block() -> usize {
    256
}
fn default_list() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_strategies")]
    pub strategies: Vec<StrategyKind>,
    /// SNR grid in dB (`P / sigma^2` with unit noise), strictly increasing.
    #[serde(default = "default_grid")]
    pub snr_db: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// K.
    #[serde(default = "two")]
    pub users: usize,
    /// M.
    #[serde(default = "two")]
    pub antennas: usize,
    /// Per-user rate floor in bps/Hz (0 disables it).
    #[serde(default)]
    pub r0: f64,
    /// Fading blocks per SNR point; the mode's default when absent.
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Per-trial NDJSON log; `<output>.ndjson` when absent.
    #[serde(default)]
    pub audit: Option<PathBuf>,
    /// Conditional CSIT draws seen by the optimizer.
    #[serde(default = "default_conditional")]
    pub conditional_samples: usize,
    /// Fresh draws for the reported sum-rate.
    #[serde(default = "default_eval")]
    pub eval_samples: usize,
    #[serde(default = "default_amc_rule")]
    pub amc_rule: AmcRule,
    /// Only used by the `rate` rule.
    #[serde(default = "default_backoff")]
    pub backoff: f64,
    /// MCS table file; the built-in table when absent.
    #[serde(default)]
    pub amc_table: Option<PathBuf>,
    #[serde(default = "default_block")]
    pub block_length: usize,
    #[serde(default = "default_list")]
    pub list_size: usize,
    #[serde(default)]
    pub perfect_csit: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

/// Parses the right-hand side of `key=value`: a TOML value if it parses as one, a bare
/// string otherwise.
fn override_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&doc) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Self::with_overrides(text, &[])
    }

    /// Parses `text` and applies `key=value` overrides on top (later ones win).
    pub fn with_overrides(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        for o in overrides {
            let (key, value) = o.split_once('=').ok_or_else(|| ConfigError::Override(o.clone()))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Override(o.clone()));
            }
            table.insert(key.to_string(), override_value(value.trim()));
        }
        let cfg: Self = table.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::with_overrides(&text, overrides)
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or_else(|| self.mode.default_trials())
    }

    pub fn audit_path(&self) -> PathBuf {
        self.audit.clone().unwrap_or_else(|| {
            let mut p = self.output.clone().into_os_string();
            p.push(".ndjson");
            PathBuf::from(p)
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.strategies.is_empty() {
            return bad("strategies must not be empty".into());
        }
        let mut seen = self.strategies.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.strategies.len() {
            return bad("strategies must not repeat".into());
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("snr_db must be a non-empty list of finite values".into());
        }
        if self.snr_db.windows(2).any(|w| w[1] <= w[0]) {
            return bad("snr_db must be strictly increasing".into());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha = {} must lie in [0, 1]", self.alpha));
        }
        if self.users == 0 || self.antennas == 0 {
            return bad("users and antennas must be positive".into());
        }
        if self.strategies.contains(&StrategyKind::Noma) && self.users != 2 {
            return bad(format!("noma needs users = 2, got {}", self.users));
        }
        if !(self.r0 >= 0.0) || !self.r0.is_finite() {
            return bad(format!("r0 = {} must be a finite nonnegative rate", self.r0));
        }
        if self.trials == Some(0) {
            return bad("trials must be at least 1".into());
        }
        if self.conditional_samples == 0 || self.eval_samples == 0 {
            return bad("conditional_samples and eval_samples must be positive".into());
        }
        if !(self.backoff > 0.0 && self.backoff <= 1.0) {
            return bad(format!("backoff = {} must lie in (0, 1]", self.backoff));
        }
        if !self.block_length.is_power_of_two() || self.block_length < 8 || self.list_size == 0 {
            return bad("block_length must be a power of two >= 8 and list_size positive".into());
        }
        Ok(())
    }

    /// Canonical form hashed into the fingerprint: output locations dropped, defaults
    /// filled in.
    pub fn canonical(&self) -> String {
        let mut c = self.clone();
        c.output = PathBuf::new();
        c.audit = None;
        c.trials = Some(self.trials());
        serde_json::to_string(&c).expect("config serializes")
    }

    /// SHA-256 of the canonical config and the MCS table in use, first 16 hex digits.
    pub fn fingerprint(&self, mcs_table: &str) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical().as_bytes());
        h.update([0u8]);
        h.update(mcs_table.as_bytes());
        hex::encode(h.finalize())[..16].to_string()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
