//! `hopwise`: bounds evaluation, single simulations with traces, and
//! sweep experiments.
//!
//! Exit status: 0 on success (and on convergence for `simulate`), 2 when a
//! simulation exhausts its budget, 1 on usage or configuration errors.

mod graph_spec;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hopwise::algorithms::Reciprocal;
use hopwise::bounds::{
    gamma_closed, gamma_general, gamma_general_range, gamma_pa_complete, gamma_two_iteration, ClosedBounds,
    GammaBound,
};
use hopwise::harness::{self, DEFAULT_TOLERANCE};
use hopwise::{AlgorithmConfig, AlgorithmKind, FamilyTag, Graph, RunOptions, Scenario, SweepConfig, Weights};

use graph_spec::GraphSpec;

#[derive(Parser, Debug)]
#[command(name = "hopwise", version, about = "Distributed averaging simulator and convergence bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print convergence-rate bounds for a graph family or a concrete graph.
    Bounds(BoundsArgs),
    /// Run one algorithm on one network.
    Simulate(SimulateArgs),
    /// Run several algorithms over a grid of random geometric networks.
    Sweep(SweepArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FamilyArg {
    Path,
    Cycle,
    Complete,
    Regular,
    Petersen,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// Graph family evaluated in closed form.
    #[arg(long, value_enum, conflicts_with = "graph", required_unless_present = "graph")]
    family: Option<FamilyArg>,
    /// Number of nodes (not needed for petersen).
    #[arg(long)]
    n: Option<usize>,
    /// Degree of the regular family.
    #[arg(long)]
    k: Option<usize>,
    /// Concrete graph: family:NAME,PARAMS | geometric:N,AVG_DEGREE | file:PATH.
    #[arg(long)]
    graph: Option<String>,
    /// Seed for geometric graphs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct AlgoParams {
    /// Scale c of the controlled scheduling function phi(v) = c / v.
    #[arg(long, default_value_t = 1.0)]
    cha_phi_scale: f64,
    /// Event-time jitter width of the controlled algorithm.
    #[arg(long, default_value_t = 0.001)]
    cha_eps: f64,
    /// Consensus propagation damping; "inf" disables it.
    #[arg(long, default_value_t = 1e6)]
    cp_beta: f64,
    /// A2 relaxation step.
    #[arg(long, default_value_t = 0.3)]
    a2_gamma: f64,
    /// A2 correction gain.
    #[arg(long, default_value_t = 0.49)]
    a2_phi: f64,
}

impl AlgoParams {
    fn config(&self, kind: AlgorithmKind) -> Result<AlgorithmConfig> {
        let cfg = AlgorithmConfig {
            kind,
            cha_phi: Reciprocal {
                scale: self.cha_phi_scale,
            },
            cha_eps: self.cha_eps,
            cp_beta: self.cp_beta,
            a2_gamma: self.a2_gamma,
            a2_phi: self.a2_phi,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// One of rha, icha, cha, pa, cp, a2, drg.
    #[arg(long)]
    algo: AlgorithmKind,
    /// family:NAME,PARAMS | geometric:N,AVG_DEGREE | file:PATH.
    #[arg(long)]
    graph: String,
    /// Comma-separated observations; uniform (0, 1) from the seed otherwise.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    y: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Transmission budget [default: 3 n^2].
    #[arg(long)]
    budget: Option<u64>,
    /// Convergence tolerance on every estimate.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    /// Write the per-iteration trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the run summary as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    params: AlgoParams,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Comma-separated node counts.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Comma-separated average degrees.
    #[arg(long, value_delimiter = ',', required = true)]
    avg_degree: Vec<usize>,
    /// Scenarios per grid cell.
    #[arg(long, default_value_t = 50)]
    scenarios: usize,
    /// Comma-separated algorithms.
    #[arg(long, value_delimiter = ',', default_value = "rha,cha,pa,cp,a2,drg")]
    algos: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Transmission budget per run [default: 3 n^2].
    #[arg(long)]
    budget: Option<u64>,
    /// Convergence tolerance on every estimate.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    /// Sweep table CSV; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-run CSV.
    #[arg(long)]
    runs_out: Option<PathBuf>,
    /// Worker threads [default: all cores].
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    params: AlgoParams,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Bounds(a) => cmd_bounds(&a).map(|()| ExitCode::SUCCESS),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Sweep(a) => cmd_sweep(&a).map(|()| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(1)
    })
}

/// Largest `n * l` for which the diameter is measured on a family graph.
const MAX_DIAMETER_WORK: usize = 50_000_000;

struct BoundsRow {
    family: String,
    n: usize,
    general: Result<f64, String>,
    closed: ClosedBounds,
    pa: Option<f64>,
}

fn fmt_slot(slot: &Result<f64, String>) -> String {
    match slot {
        Ok(v) => format!("{v}"),
        Err(reason) => format!("n/a ({reason})"),
    }
}

fn bounds_for_family(a: &BoundsArgs, fam: FamilyArg) -> Result<BoundsRow> {
    let (tag, n) = match fam {
        FamilyArg::Petersen => (FamilyTag::StronglyRegular { k: 3, lambda: 0, mu: 1 }, 10),
        other => {
            let Some(n) = a.n else { bail!("--n is required for the {other:?} family") };
            let tag = match other {
                FamilyArg::Path => FamilyTag::Path,
                FamilyArg::Cycle => FamilyTag::Cycle,
                FamilyArg::Complete => FamilyTag::Complete,
                FamilyArg::Regular => {
                    let Some(k) = a.k else { bail!("--k is required for the regular family") };
                    FamilyTag::Regular { k }
                }
                FamilyArg::Petersen => unreachable!(),
            };
            (tag, n)
        }
    };
    let spec = match fam {
        FamilyArg::Petersen => GraphSpec::parse("family:petersen")?,
        FamilyArg::Regular => GraphSpec::parse(&format!("family:regular,{n},{}", a.k.unwrap_or(0)))?,
        other => GraphSpec::parse(&format!("family:{},{n}", format!("{other:?}").to_lowercase()))?,
    };
    let links_estimate = match tag {
        FamilyTag::Complete => n * n.saturating_sub(1) / 2,
        FamilyTag::Regular { k } => n * k / 2,
        _ => n + 15,
    };
    let (general, diameter) = if n.saturating_mul(links_estimate) <= MAX_DIAMETER_WORK {
        match spec.build(a.seed) {
            Ok(g) => {
                let inv = g.invariants();
                (Ok(gamma_general(&inv, &Weights::compute(&g)).value), Some(inv.diameter))
            }
            Err(e) => (Err(e.to_string()), None),
        }
    } else {
        (Err("graph too large to build".to_string()), None)
    };
    let diameter = diameter.or(match tag {
        FamilyTag::Complete => Some(1),
        _ => None,
    });
    Ok(BoundsRow {
        family: tag.to_string(),
        n,
        general,
        closed: gamma_closed(tag, n, diameter),
        pa: (tag == FamilyTag::Complete && n >= 2).then(|| gamma_pa_complete(n)),
    })
}

fn bounds_for_graph(g: &Graph) -> BoundsRow {
    let inv = g.invariants();
    let closed = match g.family_tag() {
        Some(tag) => gamma_closed(tag, g.n(), Some(inv.diameter)),
        None => ClosedBounds {
            family: Err("no family tag".into()),
            refined: Err("no family tag".into()),
        },
    };
    BoundsRow {
        family: g.family_tag().map_or_else(|| "custom".to_string(), |t| t.to_string()),
        n: g.n(),
        general: Ok(gamma_general(&inv, &Weights::compute(g)).value),
        closed,
        pa: (g.family_tag() == Some(FamilyTag::Complete)).then(|| gamma_pa_complete(g.n())),
    }
}

fn cmd_bounds(a: &BoundsArgs) -> Result<()> {
    let row = match (&a.graph, a.family) {
        (Some(spec), _) => bounds_for_graph(&GraphSpec::parse(spec)?.build(a.seed)?),
        (None, Some(fam)) => bounds_for_family(a, fam)?,
        (None, None) => bail!("either --family or --graph is required"),
    };
    let slot = |b: &Result<GammaBound, String>| b.as_ref().map(|g| g.value).map_err(Clone::clone);
    let fam = slot(&row.closed.family);
    let refined = slot(&row.closed.refined);
    let best = row
        .closed
        .best()
        .map(|b| b.value)
        .or_else(|| row.general.as_ref().ok().copied());
    let two = best
        .map(gamma_two_iteration)
        .ok_or_else(|| "no bound available".to_string());
    let pa = row.pa.ok_or_else(|| "complete graphs only".to_string());
    let (lo, hi) = gamma_general_range(row.n);

    let mut out = io::stdout().lock();
    writeln!(out, "{:<20}{}", "family", row.family)?;
    writeln!(out, "{:<20}{}", "n", row.n)?;
    writeln!(out, "{:<20}{}", "gamma_general", fmt_slot(&row.general))?;
    writeln!(out, "{:<20}{}", "gamma_family", fmt_slot(&fam))?;
    writeln!(out, "{:<20}{}", "gamma_refined", fmt_slot(&refined))?;
    writeln!(out, "{:<20}{}", "gamma_two_iter", fmt_slot(&two))?;
    writeln!(out, "{:<20}{}", "gamma_pa", fmt_slot(&pa))?;
    for (name, slot) in [("general", &row.general), ("family", &fam), ("refined", &refined)] {
        if let Ok(g) = slot {
            let label = format!("contraction_{name}");
            writeln!(out, "{label:<20}{}", 1.0 - 1.0 / g)?;
        }
    }
    writeln!(out, "{:<20}[{lo}, {hi}]", "general_range")?;

    if let Some(path) = &a.csv {
        let cell = |s: &Result<f64, String>| s.as_ref().map(|v| v.to_string()).unwrap_or_default();
        let mut f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        writeln!(f, "family,n,gamma_general,gamma_family,gamma_refined,gamma_two_iteration,gamma_pa")?;
        writeln!(
            f,
            "{},{},{},{},{},{},{}",
            row.family,
            row.n,
            cell(&row.general),
            cell(&fam),
            cell(&refined),
            cell(&two),
            cell(&pa)
        )?;
    }
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs) -> Result<ExitCode> {
    let cfg = a.params.config(a.algo)?;
    let spec = GraphSpec::parse(&a.graph)?;
    let scenario = match (&spec, &a.y) {
        (GraphSpec::Geometric { n, avg_degree }, None) => harness::generate_scenario(a.seed, 0, *n, *avg_degree)?,
        (_, Some(y)) => Scenario::new(spec.build(a.seed)?, y.clone(), a.seed, 0)?,
        (_, None) => Scenario::with_random_observations(spec.build(a.seed)?, a.seed, 0),
    };
    let opts = RunOptions {
        budget: a.budget,
        tol: a.tol,
        trace: a.trace.is_some(),
    };
    let r = harness::run_once(&scenario, cfg, &opts)?;
    if let (Some(path), Some(trace)) = (&a.trace, &r.trace) {
        harness::export_trace_csv(path, trace).with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = &a.out {
        harness::export_runs_csv(path, std::slice::from_ref(&r))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    let mut out = io::stdout().lock();
    writeln!(out, "{:<20}{}", "algorithm", r.algorithm)?;
    writeln!(out, "{:<20}{}", "n", r.n)?;
    writeln!(out, "{:<20}{}", "links", r.l)?;
    writeln!(out, "{:<20}{}", "true average", scenario.x_star)?;
    writeln!(out, "{:<20}{}", "converged", r.converged)?;
    writeln!(out, "{:<20}{}", "transmissions", r.transmissions)?;
    writeln!(out, "{:<20}{}", "iterations", r.iterations)?;
    writeln!(out, "{:<20}{}", "init overhead", r.init_overhead)?;
    Ok(if r.converged { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let kinds = a
        .algos
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<AlgorithmKind>())
        .collect::<Result<Vec<_>, _>>()?;
    if kinds.is_empty() {
        bail!("--algos must name at least one algorithm");
    }
    let algorithms = kinds
        .iter()
        .map(|&k| a.params.config(k))
        .collect::<Result<Vec<_>>>()?;
    let cfg = SweepConfig {
        ns: a.n.clone(),
        avg_degrees: a.avg_degree.clone(),
        scenarios: a.scenarios,
        algorithms,
        master_seed: a.seed,
        tol: a.tol,
        budget: a.budget,
    };
    let table = match a.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()?
            .install(|| harness::run_sweep(&cfg))?,
        None => harness::run_sweep(&cfg)?,
    };
    match &a.out {
        Some(path) => {
            harness::export_sweep_csv(path, &table).with_context(|| format!("cannot write {}", path.display()))?
        }
        None => harness::write_sweep(io::stdout().lock(), &table)?,
    }
    if let Some(path) = &a.runs_out {
        harness::export_runs_csv(path, &table.runs).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}
