use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use log::info;
use serde::Deserialize;

use mnl_core::harness::{
    emit_results, run_experiment, write_results, ExperimentConfig, Gamma, MetricsRow, OutputFormat, SWEEP_HORIZONS,
};

/// Runs switch-limited UCB sweeps over random MNL instances and writes one
/// row per run plus a mean row per (gamma, T, alpha) cell.
#[derive(Debug, Parser)]
#[command(name = "mnl-harness", version)]
struct Args {
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model size as N,K,R. Repeat for several.
    #[arg(long = "gamma", value_name = "N,K,R")]
    gammas: Vec<Gamma>,
    #[arg(long, value_delimiter = ',', value_name = "T,...")]
    horizons: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_name = "ALPHA,...")]
    alphas: Vec<f64>,
    /// Random instances per gamma.
    #[arg(long)]
    instances: Option<usize>,
    /// Runs per instance.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use confidence radii and capacity tightening in the LP.
    #[arg(long)]
    conf_enabled: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_name = "csv|json")]
    format: Option<OutputFormat>,
    /// Worker threads.
    #[arg(long, value_name = "WORKERS")]
    parallel: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    #[serde(default)]
    gamma: Vec<String>,
    #[serde(default)]
    horizons: Vec<usize>,
    #[serde(default)]
    alphas: Vec<f64>,
    instances: Option<usize>,
    runs: Option<usize>,
    seed: Option<u64>,
    conf_enabled: Option<bool>,
    out: Option<PathBuf>,
    format: Option<String>,
    parallel: Option<usize>,
}

fn or_file<T>(flag: Vec<T>, file: Vec<T>) -> Vec<T> {
    if flag.is_empty() {
        file
    } else {
        flag
    }
}

fn resolve(args: Args) -> Result<(ExperimentConfig, OutputFormat)> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => FileConfig::default(),
    };
    let file_gammas = file.gamma.iter().map(|g| g.parse::<Gamma>()).collect::<Result<Vec<_>, _>>()?;
    let file_format = file.format.as_deref().map(str::parse::<OutputFormat>).transpose()?;
    let defaults = ExperimentConfig::default();

    let mut horizons = or_file(args.horizons, file.horizons);
    if horizons.is_empty() {
        horizons = SWEEP_HORIZONS.to_vec();
    }
    horizons.sort_unstable();
    horizons.dedup();
    let cfg = ExperimentConfig {
        gammas: or_file(or_file(args.gammas, file_gammas), defaults.gammas),
        horizons,
        alphas: or_file(or_file(args.alphas, file.alphas), defaults.alphas),
        instances_per_gamma: args.instances.or(file.instances).unwrap_or(defaults.instances_per_gamma),
        runs_per_instance: args.runs.or(file.runs).unwrap_or(defaults.runs_per_instance),
        master_seed: args.seed.or(file.seed).unwrap_or(defaults.master_seed),
        output: args.out.or(file.out),
        conf_enabled: args.conf_enabled || file.conf_enabled.unwrap_or(false),
        workers: args.parallel.or(file.parallel),
    };
    cfg.validate()?;
    Ok((cfg, args.format.or(file_format).unwrap_or_default()))
}

fn summarize(rows: &[MetricsRow]) {
    let mut err = io::stderr().lock();
    for r in rows.iter().filter(|r| r.aggregate) {
        let _ = writeln!(
            err,
            "{} T={} alpha={}: mean ratio {:.4}, max switches {}/{}{}",
            r.gamma,
            r.horizon,
            r.alpha,
            r.ratio,
            r.switches,
            r.switch_limit,
            if r.failed() { format!(" [{}]", r.error) } else { String::new() }
        );
    }
}

fn run() -> Result<bool> {
    let (cfg, format) = resolve(Args::parse())?;
    info!("sweep: {cfg:?}");
    let rows = run_experiment(&cfg)?;
    match &cfg.output {
        Some(path) => emit_results(&rows, path, format)?,
        None => write_results(&rows, io::stdout().lock(), format)?,
    }
    summarize(&rows);
    let failed = rows.iter().filter(|r| r.failed() && !r.aggregate).count();
    if failed > 0 {
        eprintln!("{failed} runs failed");
    }
    Ok(failed == 0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
