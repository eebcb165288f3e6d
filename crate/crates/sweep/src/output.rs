//! Result CSV and per-trial NDJSON audit log.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use rsma_core::StrategyKind;
use thiserror::Error;

use crate::config::ExperimentConfig;
use crate::run::{AuditRecord, PointResult, SweepOutput, SweepResult};

pub const CSV_HEADER: &str = "strategy,snr_db,alpha,r0,mode,trials,sum_rate,throughput,ci95,seed,fingerprint";

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path} line {line}: {reason}")]
    Format { path: String, line: usize, reason: String },
}

/// `lls`, or `lls[infeasible=N]` when the rate floor failed on `N` blocks.
pub fn mode_field(config: &ExperimentConfig, point: &PointResult) -> String {
    if point.infeasible > 0 {
        format!("{}[infeasible={}]", config.mode, point.infeasible)
    } else {
        config.mode.to_string()
    }
}

/// One row per `(strategy, SNR)`. `ci95` is the throughput half-width in link-level
/// mode and the sum-rate half-width otherwise; throughput is empty without a coded
/// chain. Floats use the shortest representation that reads back exactly.
pub fn render_csv(result: &SweepResult) -> String {
    let c = &result.config;
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for p in &result.points {
        let throughput = p.throughput.map_or(String::new(), |t| t.to_string());
        let ci = p.throughput_ci95.unwrap_or(p.sum_rate_ci95);
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            p.strategy,
            p.snr_db,
            c.alpha,
            c.r0,
            mode_field(c, p),
            p.trials,
            p.sum_rate,
            throughput,
            ci,
            c.seed,
            result.fingerprint
        ));
    }
    s
}

/// One row of a result CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub strategy: StrategyKind,
    pub snr_db: f64,
    pub alpha: f64,
    pub r0: f64,
    pub mode: String,
    pub trials: usize,
    pub sum_rate: f64,
    pub throughput: Option<f64>,
    pub ci95: f64,
    pub seed: u64,
    pub fingerprint: String,
}

pub fn parse_csv(text: &str, path: &str) -> Result<Vec<CsvRow>, OutputError> {
    let mut lines = text.lines().enumerate();
    let err = |line: usize, reason: String| OutputError::Format { path: path.to_string(), line: line + 1, reason };
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(err(0, format!("expected header '{CSV_HEADER}'"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(err(i, format!("expected 11 fields, got {}", f.len())));
        }
        let num = |j: usize| f[j].parse::<f64>().map_err(|_| err(i, format!("field {} is not a number: '{}'", j + 1, f[j])));
        rows.push(CsvRow {
            strategy: f[0].parse().map_err(|e: String| err(i, e))?,
            snr_db: num(1)?,
            alpha: num(2)?,
            r0: num(3)?,
            mode: f[4].to_string(),
            trials: f[5].parse().map_err(|_| err(i, "bad trial count".into()))?,
            sum_rate: num(6)?,
            throughput: if f[7].is_empty() { None } else { Some(num(7)?) },
            ci95: num(8)?,
            seed: f[9].parse().map_err(|_| err(i, "bad seed".into()))?,
            fingerprint: f[10].to_string(),
        });
    }
    Ok(rows)
}

pub fn render_audit(audit: &[AuditRecord]) -> String {
    let mut s = String::new();
    for r in audit {
        s.push_str(&serde_json::to_string(r).expect("audit record serializes"));
        s.push('\n');
    }
    s
}

pub fn read_audit(path: &Path) -> Result<Vec<AuditRecord>, OutputError> {
    let name = path.display().to_string();
    let file = fs::File::open(path).map_err(|source| OutputError::Io { path: name.clone(), source })?;
    let mut out = Vec::new();
    for (i, line) in io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| OutputError::Io { path: name.clone(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| OutputError::Format { path: name.clone(), line: i + 1, reason: e.to_string() })?);
    }
    Ok(out)
}

fn write_file(path: &Path, body: &str) -> Result<(), OutputError> {
    let io_err = |source| OutputError::Io { path: path.display().to_string(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    let mut f = fs::File::create(path).map_err(io_err)?;
    f.write_all(body.as_bytes()).map_err(io_err)
}

/// Writes the CSV to `config.output` and the audit log next to it.
pub fn write_outputs(out: &SweepOutput) -> Result<(), OutputError> {
    let c = &out.result.config;
    write_file(&c.output, &render_csv(&out.result))?;
    write_file(&c.audit_path(), &render_audit(&out.audit))
}

/// Throughput per `(strategy, SNR)` recomputed from audit records as total recovered
/// bits over total channel uses.
pub fn resum_throughput(audit: &[AuditRecord]) -> Vec<(StrategyKind, f64, f64)> {
    let mut acc: Vec<(StrategyKind, f64, u64, u64)> = Vec::new();
    for r in audit {
        let Some(l) = &r.link else { continue };
        let bits: u64 = l.recovered_bits.iter().sum();
        match acc.iter_mut().find(|a| a.0 == r.strategy && a.1 == r.snr_db) {
            Some(a) => {
                a.2 += bits;
                a.3 += l.channel_uses;
            }
            None => acc.push((r.strategy, r.snr_db, bits, l.channel_uses)),
        }
    }
    acc.into_iter().map(|(s, snr, b, u)| (s, snr, b as f64 / u as f64)).collect()
}
