//! Scenario generation, single runs with transmission accounting, sweeps
//! over graph sizes and densities, and CSV export.
//!
//! Randomness is split into independent streams: one per scenario, mixed
//! from `(master_seed, index, n, avg_degree)`, and one per run, mixed from
//! `(master_seed, index, algorithm tag)`. Adding an algorithm to a sweep
//! therefore never changes the scenarios or the other algorithms' runs.

use std::fs::File;
use std::io;
use std::path::Path;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{AlgorithmConfig, AlgorithmKind, AlgorithmRun, Initiator, StepResult};
use crate::error::HarnessError;
use crate::graph::Graph;
use crate::numeric::compensated_mean;

pub const DEFAULT_TOLERANCE: f64 = 0.005;

/// Transmission cap after which a run counts as unconverged: `3 n^2`.
pub fn default_budget(n: usize) -> u64 {
    3 * (n as u64) * (n as u64)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `parts` through splitmix64 into one stream seed.
pub fn mix_seed(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x6A09_E667_F3BC_C909, |h, &p| splitmix64(h ^ splitmix64(p)))
}

fn tag_word(kind: AlgorithmKind) -> u64 {
    let mut bytes = [0u8; 8];
    let tag = kind.tag().as_bytes();
    bytes[..tag.len()].copy_from_slice(tag);
    u64::from_le_bytes(bytes)
}

pub fn scenario_seed(master_seed: u64, index: u64, n: usize, avg_degree: usize) -> u64 {
    mix_seed(&[master_seed, index, n as u64, avg_degree as u64])
}

pub fn run_seed(master_seed: u64, index: u64, kind: AlgorithmKind) -> u64 {
    mix_seed(&[master_seed, index, tag_word(kind)])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub graph: Graph,
    pub y: Vec<f64>,
    pub x_star: f64,
    pub master_seed: u64,
    pub index: u64,
}

impl Scenario {
    /// Wraps an explicit graph and observation vector.
    pub fn new(graph: Graph, y: Vec<f64>, master_seed: u64, index: u64) -> Result<Self, HarnessError> {
        if y.len() != graph.n() {
            return Err(HarnessError::Config(format!(
                "{} observations for a graph with {} nodes",
                y.len(),
                graph.n()
            )));
        }
        if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
            return Err(HarnessError::Config(format!("observation {bad} is not finite")));
        }
        let x_star = compensated_mean(&y);
        Ok(Scenario {
            graph,
            y,
            x_star,
            master_seed,
            index,
        })
    }

    /// Uniform (0, 1) observations for `graph` drawn from the scenario stream.
    pub fn with_random_observations(graph: Graph, master_seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[master_seed, index, graph.n() as u64]));
        let y: Vec<f64> = (0..graph.n()).map(|_| rng.sample(Open01)).collect();
        let x_star = compensated_mean(&y);
        Scenario {
            graph,
            y,
            x_star,
            master_seed,
            index,
        }
    }
}

/// Random geometric network with `n * avg_degree / 2` links and uniform
/// (0, 1) observations.
pub fn generate_scenario(
    master_seed: u64,
    index: u64,
    n: usize,
    avg_degree: usize,
) -> Result<Scenario, HarnessError> {
    if (n * avg_degree) % 2 != 0 {
        return Err(HarnessError::Config(format!(
            "n * avg_degree must be even, got {n} * {avg_degree}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(scenario_seed(master_seed, index, n, avg_degree));
    let graph = Graph::random_geometric(n, n * avg_degree / 2, &mut rng)?;
    let y: Vec<f64> = (0..n).map(|_| rng.sample(Open01)).collect();
    let x_star = compensated_mean(&y);
    Ok(Scenario {
        graph,
        y,
        x_star,
        master_seed,
        index,
    })
}

/// Every estimate within `tol` of `x_star` (inclusive).
pub fn check_convergence(estimates: &[f64], x_star: f64, tol: f64) -> bool {
    estimates.iter().all(|&x| (x - x_star).abs() <= tol)
}

fn max_abs_error(estimates: &[f64], x_star: f64) -> f64 {
    estimates.iter().map(|&x| (x - x_star).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Defaults to `3 n^2` when `None`.
    pub budget: Option<u64>,
    pub tol: f64,
    pub trace: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            budget: None,
            tol: DEFAULT_TOLERANCE,
            trace: false,
        }
    }
}

/// One iteration boundary of a traced run; `k = 0` is the state right
/// after initialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: u64,
    pub initiator: String,
    pub cum_transmissions: u64,
    #[serde(rename = "V")]
    pub v: Option<f64>,
    pub max_abs_error: f64,
    pub event_time: Option<f64>,
}

fn initiator_label(init: Option<Initiator>) -> String {
    match init {
        None => String::new(),
        Some(Initiator::Node(i)) => i.to_string(),
        Some(Initiator::Link(i, j)) => format!("{i}->{j}"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub algorithm: AlgorithmKind,
    pub scenario_index: u64,
    pub n: usize,
    pub l: usize,
    pub seed: u64,
    /// Transmissions up to the first converged boundary, including the
    /// initialization overhead; the budget when unconverged.
    pub transmissions: u64,
    pub converged: bool,
    pub init_overhead: u64,
    pub iterations: u64,
    pub trace: Option<Vec<TraceRecord>>,
}

fn trace_record(run: &AlgorithmRun<'_>, x_star: f64, k: u64, total: u64, init: Option<Initiator>, t: Option<f64>) -> TraceRecord {
    TraceRecord {
        k,
        initiator: initiator_label(init),
        cum_transmissions: total,
        v: run.hopwise().map(|(s, w)| s.lyapunov(w)),
        max_abs_error: max_abs_error(run.estimates(), x_star),
        event_time: t,
    }
}

/// Runs one algorithm on one scenario until convergence, termination or
/// budget exhaustion. The run stream is derived from the scenario's seed,
/// index and the algorithm.
pub fn run_once(scenario: &Scenario, config: AlgorithmConfig, opts: &RunOptions) -> Result<RunResult, HarnessError> {
    if !(opts.tol > 0.0) {
        return Err(HarnessError::Config(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let g = &scenario.graph;
    let budget = opts.budget.unwrap_or_else(|| default_budget(g.n()));
    let overhead = config.kind.init_overhead(g.n());
    if budget < overhead {
        return Err(HarnessError::BudgetBelowOverhead { budget, overhead });
    }
    let seed = run_seed(scenario.master_seed, scenario.index, config.kind);
    let mut run = AlgorithmRun::initialize(g, &scenario.y, config, seed)?;
    let mut total = overhead;
    let mut k = 0;
    let mut trace = opts.trace.then(Vec::new);
    if let Some(tr) = trace.as_mut() {
        tr.push(trace_record(&run, scenario.x_star, 0, total, None, None));
    }
    let mut converged = check_convergence(run.estimates(), scenario.x_star, opts.tol);
    while !converged {
        match run.step(budget - total)? {
            StepResult::Advanced(out) => {
                total += out.transmissions;
                k += 1;
                if let Some(tr) = trace.as_mut() {
                    tr.push(trace_record(&run, scenario.x_star, k, total, out.initiator, out.event_time));
                }
                converged = check_convergence(run.estimates(), scenario.x_star, opts.tol);
            }
            StepResult::Terminated | StepResult::OverBudget { .. } => break,
        }
    }
    Ok(RunResult {
        algorithm: config.kind,
        scenario_index: scenario.index,
        n: g.n(),
        l: g.num_links(),
        seed,
        transmissions: if converged { total } else { budget },
        converged,
        init_overhead: overhead,
        iterations: k,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub ns: Vec<usize>,
    pub avg_degrees: Vec<usize>,
    pub scenarios: usize,
    pub algorithms: Vec<AlgorithmConfig>,
    pub master_seed: u64,
    pub tol: f64,
    /// Per-cell budget; `3 n^2` when `None`.
    pub budget: Option<u64>,
}

impl SweepConfig {
    pub fn new(ns: Vec<usize>, avg_degrees: Vec<usize>, scenarios: usize, algorithms: Vec<AlgorithmKind>, master_seed: u64) -> Self {
        SweepConfig {
            ns,
            avg_degrees,
            scenarios,
            algorithms: algorithms.into_iter().map(AlgorithmConfig::new).collect(),
            master_seed,
            tol: DEFAULT_TOLERANCE,
            budget: None,
        }
    }
}

/// Summary of one `(n, avg_degree, algorithm)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub avg_degree: usize,
    pub algorithm: String,
    pub scenarios: usize,
    pub mean_transmissions: f64,
    /// Sample standard deviation; 0 for a single scenario.
    pub std_transmissions: f64,
    pub converged_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Individual runs ordered by `(n, avg_degree, algorithm, index)`.
    pub runs: Vec<RunResult>,
}

impl SweepTable {
    pub fn row(&self, n: usize, avg_degree: usize, kind: AlgorithmKind) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.avg_degree == avg_degree && r.algorithm == kind.tag())
    }
}

fn summarize(n: usize, avg_degree: usize, kind: AlgorithmKind, runs: &[&RunResult]) -> SweepRow {
    let counts: Vec<f64> = runs.iter().map(|r| r.transmissions as f64).collect();
    let mean = compensated_mean(&counts);
    let std = if counts.len() > 1 {
        let ss: f64 = counts.iter().map(|c| (c - mean) * (c - mean)).sum();
        (ss / (counts.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    let conv = runs.iter().filter(|r| r.converged).count() as f64 / runs.len() as f64;
    SweepRow {
        n,
        avg_degree,
        algorithm: kind.tag().to_string(),
        scenarios: runs.len(),
        mean_transmissions: mean,
        std_transmissions: std,
        converged_fraction: conv,
    }
}

/// Runs every algorithm on the same scenarios of every grid cell. Scenarios
/// run in parallel; the output order never depends on scheduling.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepTable, HarnessError> {
    if cfg.scenarios == 0 {
        return Err(HarnessError::Config("at least one scenario is required".into()));
    }
    if cfg.algorithms.is_empty() {
        return Err(HarnessError::Config("algorithm list is empty".into()));
    }
    if cfg.ns.is_empty() || cfg.avg_degrees.is_empty() {
        return Err(HarnessError::Config("grid is empty".into()));
    }
    let mut algorithms = cfg.algorithms.clone();
    algorithms.sort_by_key(|a| a.kind);
    algorithms.dedup_by_key(|a| a.kind);
    for a in &algorithms {
        a.validate()?;
    }
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    let mut ns = cfg.ns.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut degrees = cfg.avg_degrees.clone();
    degrees.sort_unstable();
    degrees.dedup();
    for &n in &ns {
        for &d in &degrees {
            let opts = RunOptions {
                budget: cfg.budget,
                tol: cfg.tol,
                trace: false,
            };
            let per_scenario: Vec<Vec<RunResult>> = (0..cfg.scenarios as u64)
                .into_par_iter()
                .map(|index| {
                    let sc = generate_scenario(cfg.master_seed, index, n, d)?;
                    algorithms.iter().map(|&a| run_once(&sc, a, &opts)).collect()
                })
                .collect::<Result<_, HarnessError>>()?;
            for (ai, a) in algorithms.iter().enumerate() {
                let cell: Vec<&RunResult> = per_scenario.iter().map(|rs| &rs[ai]).collect();
                rows.push(summarize(n, d, a.kind, &cell));
                runs.extend(cell.into_iter().cloned());
            }
        }
    }
    Ok(SweepTable { rows, runs })
}

/// One line of the per-run CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub scenario_index: u64,
    pub algorithm: String,
    pub n: usize,
    pub l: usize,
    pub seed: u64,
    pub transmissions: u64,
    pub converged: bool,
}

impl From<&RunResult> for RunRow {
    fn from(r: &RunResult) -> Self {
        RunRow {
            scenario_index: r.scenario_index,
            algorithm: r.algorithm.tag().to_string(),
            n: r.n,
            l: r.l,
            seed: r.seed,
            transmissions: r.transmissions,
            converged: r.converged,
        }
    }
}

fn write_rows<W: io::Write, T: Serialize>(w: W, rows: &[T]) -> Result<(), HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::Config("nothing to export".into()));
    }
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

fn read_rows<R: io::Read, T: for<'de> Deserialize<'de>>(r: R) -> Result<Vec<T>, HarnessError> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize().map(|row| row.map_err(HarnessError::from)).collect()
}

pub fn write_runs<W: io::Write>(w: W, runs: &[RunResult]) -> Result<(), HarnessError> {
    let rows: Vec<RunRow> = runs.iter().map(RunRow::from).collect();
    write_rows(w, &rows)
}

pub fn write_sweep<W: io::Write>(w: W, table: &SweepTable) -> Result<(), HarnessError> {
    write_rows(w, &table.rows)
}

pub fn write_trace<W: io::Write>(w: W, trace: &[TraceRecord]) -> Result<(), HarnessError> {
    write_rows(w, trace)
}

pub fn export_runs_csv(path: &Path, runs: &[RunResult]) -> Result<(), HarnessError> {
    write_runs(File::create(path)?, runs)
}

pub fn export_sweep_csv(path: &Path, table: &SweepTable) -> Result<(), HarnessError> {
    write_sweep(File::create(path)?, table)
}

pub fn export_trace_csv(path: &Path, trace: &[TraceRecord]) -> Result<(), HarnessError> {
    write_trace(File::create(path)?, trace)
}

pub fn read_runs_csv(path: &Path) -> Result<Vec<RunRow>, HarnessError> {
    read_rows(File::open(path)?)
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>, HarnessError> {
    read_rows(File::open(path)?)
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRecord>, HarnessError> {
    read_rows(File::open(path)?)
}
