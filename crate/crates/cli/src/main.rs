//! `rsma`: sweeps, DoF fits, single-block optimization, codec self-test and plot data.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rsma_core::{averaged_rate_report, RateReport, StrategyKind};
use rsma_phy::fixture::{check_fixtures, parse_fixtures, DEFAULT_FIXTURES};
use rsma_phy::link::random_payloads;
use rsma_phy::{qam_demap, Link, McsTable};
use rsma_sweep::{emit_plot, estimate_dof, parse_csv, run_sweep, write_outputs, ConfigError, ExperimentConfig, SweepContext, SweepError};
use serde::Serialize;

const DOF_GRID: &str = "[25, 30, 35, 40, 45]";

#[derive(Parser)]
#[command(name = "rsma", version, about = "Rate-splitting, SDMA and NOMA downlink experiments")]
struct Cli {
    /// More progress output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Only errors on stderr and no summary on stdout.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an SNR sweep and write the result CSV and per-trial audit log.
    Sweep(RunArgs),
    /// Fit high-SNR sum-rate slopes and compare them with the predicted DoF.
    Dof(RunArgs),
    /// Optimize precoders for one fading block and print them as JSON.
    Optimize(OptimizeArgs),
    /// Check the polar fixtures and a noiseless frame per MCS.
    CodecSelftest(SelftestArgs),
    /// Turn a result CSV into per-strategy series files and a plotting script.
    EmitPlot(PlotArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment configuration (TOML key = value).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override a configuration key; later overrides win.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Result CSV path; the audit log goes next to it.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Worker threads (defaults to the available cores).
    #[arg(long, env = "RSMA_JOBS", value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, allow_negative_numbers = true)]
    snr: f64,
    /// Block index.
    #[arg(long, default_value_t = 0)]
    trial: u64,
    /// JSON output file instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Extra fixture file (`N k payload codeword` per line).
    #[arg(long, value_name = "FILE")]
    fixtures: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    list_size: usize,
}

#[derive(Args)]
struct PlotArgs {
    /// Result CSV written by `sweep`.
    input: PathBuf,
    /// Directory for the series files and `plot.py`.
    #[arg(long, value_name = "DIR", default_value = "plot")]
    out: PathBuf,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Config(c) => Failure::Config(c.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn runtime<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Runtime(e.to_string())
}

struct Reporter {
    verbose: u8,
    quiet: bool,
}

impl Reporter {
    fn say(&self, line: &str) {
        if !self.quiet {
            println!("{line}");
        }
    }

    fn progress(&self, line: &str) {
        if self.verbose > 0 && !self.quiet {
            eprintln!("{line}");
        }
    }
}

fn load_config(args: &ConfigArgs, extra: &[String], defaults: &[String]) -> Result<ExperimentConfig, Failure> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut overrides = defaults.to_vec();
    overrides.extend(args.overrides.iter().cloned());
    if let Some(seed) = args.seed {
        overrides.push(format!("seed={seed}"));
    }
    overrides.extend(extra.iter().cloned());
    Ok(ExperimentConfig::with_overrides(&text, &overrides)?)
}

fn out_override(out: &Option<PathBuf>) -> Vec<String> {
    out.iter().map(|p| format!("output={}", toml::Value::String(p.display().to_string()))).collect()
}

fn jobs(requested: Option<u16>) -> usize {
    requested.map(usize::from).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn sweep(args: &RunArgs, rep: &Reporter) -> Result<(), Failure> {
    let config = load_config(&args.config, &out_override(&args.out), &[])?;
    let jobs = jobs(args.jobs);
    rep.progress(&format!(
        "{} trials x {} SNR points x {} strategies, {} mode, {jobs} worker(s)",
        config.trials(),
        config.snr_db.len(),
        config.strategies.len(),
        config.mode
    ));
    let start = Instant::now();
    let out = run_sweep(&config, jobs)?;
    write_outputs(&out).map_err(runtime)?;
    rep.progress(&format!("finished in {:.1?}", start.elapsed()));
    for p in &out.result.points {
        let tp = p.throughput.map_or(String::new(), |t| format!(" throughput {t:.3}"));
        let inf = if p.infeasible > 0 { format!(" ({} infeasible)", p.infeasible) } else { String::new() };
        rep.progress(&format!("{:>5} {:>5} dB: sum rate {:.3}{tp}{inf}", p.strategy, p.snr_db, p.sum_rate));
    }
    rep.say(&format!("wrote {} and {}", config.output.display(), config.audit_path().display()));
    Ok(())
}

fn config_has_key(args: &ConfigArgs, key: &str) -> bool {
    let in_file =
        args.config.as_ref().and_then(|p| std::fs::read_to_string(p).ok()).and_then(|t| t.parse::<toml::Table>().ok()).is_some_and(|t| t.contains_key(key));
    in_file || args.overrides.iter().any(|o| o.split_once('=').is_some_and(|(k, _)| k.trim() == key))
}

fn dof(args: &RunArgs, rep: &Reporter) -> Result<(), Failure> {
    let mut defaults = vec!["mode=\"dof\"".to_string()];
    if !config_has_key(&args.config, "snr_db") {
        defaults.push(format!("snr_db={DOF_GRID}"));
    }
    if !config_has_key(&args.config, "strategies") {
        defaults.push("strategies=[\"sdma\", \"rsma\"]".into());
    }
    let config = load_config(&args.config, &out_override(&args.out), &defaults)?;
    let start = Instant::now();
    let report = estimate_dof(&config, jobs(args.jobs))?;
    write_outputs(&report.sweep).map_err(runtime)?;
    rep.progress(&format!("finished in {:.1?}", start.elapsed()));
    rep.say(&format!("alpha = {}, K = {}, grid {:?} dB, {} blocks/point", config.alpha, config.users, config.snr_db, config.trials()));
    for e in &report.estimates {
        match e.predicted {
            Some(p) => rep.say(&format!("{:>5}: slope {:.3}, predicted {:.3}, off by {:+.3}", e.strategy, e.measured, p, e.measured - p)),
            None => rep.say(&format!("{:>5}: slope {:.3}", e.strategy, e.measured)),
        }
    }
    rep.say(&format!("wrote {}", config.output.display()));
    Ok(())
}

#[derive(Serialize)]
struct StrategyReport<'a> {
    strategy: StrategyKind,
    /// Sum rate on fresh conditional draws, as reported by a sweep.
    held_out_sum_rate: f64,
    held_out: RateReport,
    optimized: &'a rsma_core::Optimized,
}

#[derive(Serialize)]
struct OptimizeReport<'a> {
    snr_db: f64,
    trial: u64,
    seed: u64,
    fingerprint: String,
    strategies: Vec<StrategyReport<'a>>,
}

fn optimize(args: &OptimizeArgs, rep: &Reporter) -> Result<(), Failure> {
    let mut config = load_config(&args.config, &[], &[])?;
    config.mode = rsma_sweep::Mode::Shannon;
    let ctx = SweepContext::from_config(config)?;
    let solution = ctx.solve_block(args.snr, args.trial)?;
    let strategies = ctx
        .config
        .strategies
        .iter()
        .map(|kind| {
            let opt = solution.get(*kind).expect("configured strategies are solved");
            let held_out = averaged_rate_report(&solution.held_out, &opt.precoders).map_err(runtime)?;
            Ok(StrategyReport { strategy: *kind, held_out_sum_rate: held_out.sum_rate(), held_out, optimized: opt })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    for s in &strategies {
        rep.progress(&format!("{:>5}: sum rate {:.4} ({:?})", s.strategy, s.held_out_sum_rate, s.optimized.qos));
    }
    let report = OptimizeReport { snr_db: args.snr, trial: args.trial, seed: ctx.config.seed, fingerprint: ctx.fingerprint(), strategies };
    let json = serde_json::to_string_pretty(&report).map_err(runtime)?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, json + "\n").map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            rep.say(&format!("wrote {}", path.display()));
        }
        None => println!("{json}"),
    }
    Ok(())
}

/// Noiseless full frames through every MCS of `table`.
fn frame_round_trips(table: &McsTable, list_size: usize, rep: &Reporter) -> Result<bool, Failure> {
    let link = Link::new(table.clone(), 256, list_size).map_err(runtime)?;
    let mut ok = true;
    for (i, mcs) in table.entries().iter().enumerate() {
        let codec = link.codec(i).map_err(runtime)?;
        let payloads = random_payloads(codec, 0x5e1f, i as u64, 0);
        let (_, symbols) = codec.modulate(&payloads).map_err(runtime)?;
        let llrs = qam_demap(&symbols, mcs.modulation_order, 1e-3, 0.0).map_err(runtime)?;
        let decoded = codec.decode(&llrs);
        let good = decoded.iter().zip(&payloads).filter(|(d, p)| d.crc_pass && &d.payload == *p).count();
        ok &= good == payloads.len();
        rep.progress(&format!("{:>3}-QAM {:>7}: {good}/{} codewords", mcs.modulation_order, mcs.code_rate.to_string(), payloads.len()));
    }
    Ok(ok)
}

fn codec_selftest(args: &SelftestArgs, rep: &Reporter) -> Result<(), Failure> {
    let mut sources = vec![("built-in fixtures".to_string(), DEFAULT_FIXTURES.to_string())];
    if let Some(path) = &args.fixtures {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        sources.push((path.display().to_string(), text));
    }
    let mut ok = true;
    for (name, text) in &sources {
        let fixtures = parse_fixtures(text).map_err(|e| Failure::Config(format!("{name}: {e}")))?;
        let r = check_fixtures(&fixtures, args.list_size).map_err(runtime)?;
        ok &= r.passed();
        rep.say(&format!("{name}: {} checked, {} encode mismatches, {} decode failures", r.checked, r.encode_mismatches, r.decode_failures));
    }
    let table = McsTable::default_table();
    let frames = frame_round_trips(&table, args.list_size, rep)?;
    rep.say(&format!("noiseless frames over {} MCS entries: {}", table.len(), if frames { "ok" } else { "FAILED" }));
    if ok && frames {
        Ok(())
    } else {
        Err(Failure::Runtime("codec self-test failed".into()))
    }
}

fn plot(args: &PlotArgs, rep: &Reporter) -> Result<(), Failure> {
    let name = args.input.display().to_string();
    let text = std::fs::read_to_string(&args.input).map_err(|e| Failure::Runtime(format!("cannot read {name}: {e}")))?;
    let rows = parse_csv(&text, &name).map_err(runtime)?;
    if rows.is_empty() {
        return Err(Failure::Runtime(format!("{name} has no result rows")));
    }
    for path in emit_plot(&rows, &args.out).map_err(runtime)? {
        rep.say(&format!("wrote {}", path.display()));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let rep = Reporter { verbose: cli.verbose, quiet: cli.quiet };
    match &cli.command {
        Command::Sweep(a) => sweep(a, &rep),
        Command::Dof(a) => dof(a, &rep),
        Command::Optimize(a) => optimize(a, &rep),
        Command::CodecSelftest(a) => codec_selftest(a, &rep),
        Command::EmitPlot(a) => plot(a, &rep),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            // Usage errors go to stderr, help and version to stdout.
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
