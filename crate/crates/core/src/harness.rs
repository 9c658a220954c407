//! Experiment sweeps: random instances on a `(N, K, R)` grid, policy runs
//! over horizons and switch exponents, and tabular output.
//!
//! Seeds are derived by hashing integer tags with SplitMix64, so an instance
//! depends only on `(master seed, gamma, instance id)` and a run only on
//! `(instance seed, T, run id)`. Every `alpha` therefore sees the same
//! instances and the same run seeds.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::fluid_benchmark;
use crate::mnl::{PreferenceVector, ProblemInstance};
use crate::policy::{run_ucb_policy, PolicyConfig};

/// Model size `(N, K, R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gamma {
    pub n: usize,
    pub k: usize,
    pub r: f64,
}

pub const GAMMA_1: Gamma = Gamma { n: 10, k: 5, r: 3.0 };
pub const GAMMA_2: Gamma = Gamma { n: 15, k: 6, r: 5.0 };
pub const GAMMA_3: Gamma = Gamma { n: 25, k: 8, r: 7.0 };
pub const GAMMA_4: Gamma = Gamma { n: 50, k: 12, r: 12.0 };

/// Horizons of the full sweep.
pub const SWEEP_HORIZONS: [usize; 11] = [250, 500, 750, 1000, 1500, 2000, 5000, 10000, 20000, 30000, 40000];

impl Gamma {
    pub fn new(n: usize, k: usize, r: f64) -> Result<Self> {
        let g = Gamma { n, k, r };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 || !(self.r >= 1.0) || !self.r.is_finite() {
            return Err(Error::InvalidInput(format!("invalid gamma {self}")));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n, self.k, self.r)
    }
}

impl FromStr for Gamma {
    type Err = Error;

    /// Accepts `N,K,R`, optionally wrapped in parentheses.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        let [n, k, r] = parts[..] else {
            return Err(Error::Parse(format!("gamma must be N,K,R, got {s:?}")));
        };
        let bad = |what: &str| Error::Parse(format!("bad {what} in gamma {s:?}"));
        Gamma::new(n.parse().map_err(|_| bad("N"))?, k.parse().map_err(|_| bad("K"))?, r.parse().map_err(|_| bad("R"))?)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds tags into one seed.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6a09_e667_f3bc_c909, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn instance_seed(master: u64, gamma: &Gamma, instance: usize) -> u64 {
    derive_seed(&[master, gamma.n as u64, gamma.k as u64, gamma.r.to_bits(), instance as u64])
}

pub fn run_seed(instance_seed: u64, horizon: usize, run: usize) -> u64 {
    derive_seed(&[instance_seed, horizon as u64, run as u64])
}

/// Random instance drawn with `ChaCha8Rng::seed_from_u64(seed)`, in this order:
/// `r(i) ~ U[0,1]` for all `i`; `a(i,k) ~ U[0,1]` row by row;
/// `v*(i) = exp(U[-log R, log R])`; `c(k) ~ U[0.25, 0.75]`.
///
/// The horizon is set to 1; use [`ProblemInstance::with_horizon`].
pub fn generate_instance(gamma: &Gamma, seed: u64) -> Result<ProblemInstance> {
    gamma.validate()?;
    let Gamma { n, k, r } = *gamma;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let revenue: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let consumption: Vec<Vec<f64>> = (0..n).map(|_| (0..k).map(|_| rng.random::<f64>()).collect()).collect();
    let log_r = r.ln();
    let pref: Vec<f64> = (0..n)
        .map(|_| rng.random_range(-log_r..=log_r).exp().clamp(1.0 / r, r))
        .collect();
    let capacity: Vec<f64> = (0..k).map(|_| rng.random_range(0.25..=0.75)).collect();
    ProblemInstance::new(revenue, consumption, capacity, 1, PreferenceVector::new(pref)?, r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub gammas: Vec<Gamma>,
    pub horizons: Vec<usize>,
    pub alphas: Vec<f64>,
    pub instances_per_gamma: usize,
    pub runs_per_instance: usize,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
    pub conf_enabled: bool,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            gammas: vec![GAMMA_1],
            horizons: SWEEP_HORIZONS.to_vec(),
            alphas: vec![0.0, 0.5, 1.0],
            instances_per_gamma: 5,
            runs_per_instance: 10,
            master_seed: 0,
            output: None,
            conf_enabled: false,
            workers: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gammas.is_empty() || self.horizons.is_empty() || self.alphas.is_empty() {
            return Err(Error::InvalidInput("gammas, horizons and alphas must be non-empty".into()));
        }
        if self.instances_per_gamma == 0 || self.runs_per_instance == 0 {
            return Err(Error::InvalidInput("instance and run counts must be positive".into()));
        }
        if self.horizons.contains(&0) || !self.horizons.is_sorted() {
            return Err(Error::InvalidInput("horizons must be positive and sorted".into()));
        }
        if self.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::InvalidInput("alphas must lie in [0, 1]".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidInput("worker count must be positive".into()));
        }
        self.gammas.iter().try_for_each(Gamma::validate)
    }
}

/// One output line. Column order is the field order below.
///
/// Aggregate rows (`aggregate = true`, `instance = run = -1`) summarize one
/// `(gamma, T, alpha)` cell over its successful runs: revenue, benchmark,
/// ratio, regret and wall time are means, switches and epochs are maxima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub gamma: String,
    pub horizon: usize,
    pub alpha: f64,
    pub instance: i64,
    pub run: i64,
    pub revenue: f64,
    pub benchmark: f64,
    pub ratio: f64,
    pub regret: f64,
    pub switches: usize,
    pub switch_limit: usize,
    pub epochs: usize,
    pub wall_ms: f64,
    pub depletion_period: i64,
    pub aggregate: bool,
    pub error: String,
}

impl MetricsRow {
    pub const HEADER: [&'static str; 16] = [
        "gamma",
        "horizon",
        "alpha",
        "instance",
        "run",
        "revenue",
        "benchmark",
        "ratio",
        "regret",
        "switches",
        "switch_limit",
        "epochs",
        "wall_ms",
        "depletion_period",
        "aggregate",
        "error",
    ];

    pub fn failed(&self) -> bool {
        !self.error.is_empty()
    }

    /// Equality ignoring wall-clock time.
    pub fn same_outcome(&self, other: &MetricsRow) -> bool {
        let strip = |r: &MetricsRow| MetricsRow { wall_ms: 0.0, ..r.clone() };
        strip(self) == strip(other)
    }
}

fn ratio(revenue: f64, benchmark: f64) -> f64 {
    if benchmark > 0.0 {
        revenue / benchmark
    } else if revenue == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

struct Cell {
    gamma_idx: usize,
    gamma: Gamma,
    instance: usize,
    horizon: usize,
    alpha_idx: usize,
    alpha: f64,
    run: usize,
}

fn run_cell(cell: &Cell, base: &Result<ProblemInstance>, seed: u64, conf_enabled: bool) -> MetricsRow {
    let mut row = MetricsRow {
        gamma: cell.gamma.label(),
        horizon: cell.horizon,
        alpha: cell.alpha,
        instance: cell.instance as i64,
        run: cell.run as i64,
        revenue: 0.0,
        benchmark: 0.0,
        ratio: 0.0,
        regret: 0.0,
        switches: 0,
        switch_limit: 0,
        epochs: 0,
        wall_ms: 0.0,
        depletion_period: -1,
        aggregate: false,
        error: String::new(),
    };
    let outcome = base.as_ref().map_err(Clone::clone).and_then(|base| {
        let inst = base.with_horizon(cell.horizon);
        let benchmark = fluid_benchmark(&inst)?;
        let cfg = PolicyConfig { conf_enabled, ..PolicyConfig::with_alpha(cell.alpha, run_seed(seed, cell.horizon, cell.run)) };
        let start = Instant::now();
        let res = run_ucb_policy(&inst, &cfg)?;
        Ok((benchmark, res, start.elapsed().as_secs_f64() * 1e3))
    });
    match outcome {
        Ok((benchmark, res, wall_ms)) => {
            row.revenue = res.revenue();
            row.benchmark = benchmark;
            row.ratio = ratio(row.revenue, benchmark);
            row.regret = benchmark - row.revenue;
            row.switches = res.state.switches;
            row.switch_limit = res.switch_limit;
            row.epochs = res.epochs.len();
            row.wall_ms = wall_ms;
            row.depletion_period = res.depletion_period.map_or(-1, |p| p as i64);
        }
        Err(e) => row.error = e.to_string(),
    }
    row
}

fn aggregate(runs: &[MetricsRow]) -> MetricsRow {
    let ok: Vec<&MetricsRow> = runs.iter().filter(|r| !r.failed()).collect();
    let mean = |f: fn(&MetricsRow) -> f64| {
        if ok.is_empty() {
            0.0
        } else {
            ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
        }
    };
    let failures = runs.len() - ok.len();
    let first = &runs[0];
    MetricsRow {
        gamma: first.gamma.clone(),
        horizon: first.horizon,
        alpha: first.alpha,
        instance: -1,
        run: -1,
        revenue: mean(|r| r.revenue),
        benchmark: mean(|r| r.benchmark),
        ratio: mean(|r| r.ratio),
        regret: mean(|r| r.regret),
        switches: ok.iter().map(|r| r.switches).max().unwrap_or(0),
        switch_limit: ok.iter().map(|r| r.switch_limit).max().unwrap_or(0),
        epochs: ok.iter().map(|r| r.epochs).max().unwrap_or(0),
        wall_ms: mean(|r| r.wall_ms),
        depletion_period: -1,
        aggregate: true,
        error: if failures == 0 { String::new() } else { format!("{failures} of {} runs failed", runs.len()) },
    }
}

/// Runs every `(gamma, instance, T, alpha, run)` cell and returns the run
/// rows of each `(gamma, T, alpha)` group followed by its aggregate row.
/// Groups follow the config order of gammas, sorted horizons, then alphas.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<MetricsRow>> {
    cfg.validate()?;
    let bases: Vec<Vec<(u64, Result<ProblemInstance>)>> = cfg
        .gammas
        .iter()
        .map(|g| {
            (0..cfg.instances_per_gamma)
                .map(|i| {
                    let seed = instance_seed(cfg.master_seed, g, i);
                    (seed, generate_instance(g, seed))
                })
                .collect()
        })
        .collect();

    let mut cells = Vec::new();
    for (gamma_idx, gamma) in cfg.gammas.iter().enumerate() {
        for &horizon in &cfg.horizons {
            for (alpha_idx, &alpha) in cfg.alphas.iter().enumerate() {
                for instance in 0..cfg.instances_per_gamma {
                    for run in 0..cfg.runs_per_instance {
                        cells.push(Cell { gamma_idx, gamma: *gamma, instance, horizon, alpha_idx, alpha, run });
                    }
                }
            }
        }
    }

    let work = || -> Vec<(usize, MetricsRow)> {
        cells
            .par_iter()
            .enumerate()
            .map(|(idx, cell)| {
                let (seed, base) = &bases[cell.gamma_idx][cell.instance];
                (idx, run_cell(cell, base, *seed, cfg.conf_enabled))
            })
            .collect()
    };
    let mut rows = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidInput(e.to_string()))?
            .install(work),
        None => work(),
    };
    rows.sort_by_key(|(idx, _)| *idx);

    let group_len = cfg.instances_per_gamma * cfg.runs_per_instance;
    let mut out = Vec::with_capacity(rows.len() + rows.len() / group_len);
    for (chunk, cells) in rows.chunks(group_len).zip(cells.chunks(group_len)) {
        debug_assert!(cells.iter().all(|c| c.alpha_idx == cells[0].alpha_idx));
        let group: Vec<MetricsRow> = chunk.iter().map(|(_, r)| r.clone()).collect();
        let agg = aggregate(&group);
        out.extend(group);
        out.push(agg);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Parse(format!("unknown format {other:?}"))),
        }
    }
}

pub fn write_results<W: Write>(rows: &[MetricsRow], out: W, format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            wtr.write_record(MetricsRow::HEADER).map_err(|e| Error::Io(e.to_string()))?;
            for row in rows {
                wtr.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
            }
            wtr.flush()?;
        }
        OutputFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows).map_err(|e| Error::Io(e.to_string()))?;
            out.write_all(b"\n")?;
            out.flush()?;
        }
    }
    Ok(())
}

pub fn emit_results(rows: &[MetricsRow], path: &Path, format: OutputFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_results(rows, BufWriter::new(file), format)
}

pub fn parse_results<R: Read>(input: R, format: OutputFormat) -> Result<Vec<MetricsRow>> {
    match format {
        OutputFormat::Csv => csv::Reader::from_reader(input)
            .deserialize()
            .collect::<std::result::Result<Vec<MetricsRow>, _>>()
            .map_err(|e| Error::Parse(e.to_string())),
        OutputFormat::Json => serde_json::from_reader(input).map_err(|e| Error::Parse(e.to_string())),
    }
}

pub fn read_results(path: &Path, format: OutputFormat) -> Result<Vec<MetricsRow>> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_results(file, format)
}
