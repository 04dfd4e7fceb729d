//! End-to-end acceptance checks. Each test prints one `[PASS]` or `[FAIL]`
//! line for its criterion before asserting.
//!
//! Run with `cargo test -p hopwise-cli --test acceptance -- --nocapture`.
//! The full density grid is behind `--ignored`.

use std::path::Path;
use std::process::Command;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hopwise::algorithms::{cha_schedule_init, step_cha, step_icha, AlgorithmConfig, AlgorithmKind};
use hopwise::bounds::{
    error_envelope, gamma_closed_for_graph, gamma_general, gamma_general_range, gamma_pa_complete,
    gamma_two_iteration,
};
use hopwise::graph::Family;
use hopwise::harness::{generate_scenario, run_once, run_sweep, RunOptions, SweepConfig};
use hopwise::hopwise::update_matrix;
use hopwise::{Graph, HopwiseState, Weights};

fn report(id: &str, what: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("[PASS] {id}: {what}");
    } else {
        println!("[FAIL] {id}: {what}");
        for f in failures.iter().take(10) {
            println!("       {f}");
        }
        if failures.len() > 10 {
            println!("       ... {} more", failures.len() - 10);
        }
    }
    assert!(failures.is_empty(), "{id} failed: {}", failures.join("; "));
}

fn rel_ok(a: f64, b: f64, tol: f64, floor: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(floor)
}

fn uniform_y(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(Open01)).collect()
}

fn family(f: Family) -> (String, Graph) {
    (format!("{f:?}"), Graph::family(f).unwrap())
}

/// Path, cycle and complete graphs on 3..=12 nodes, circulants, Petersen
/// and a few random geometric graphs.
fn fixture_graphs() -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for n in 3..=12 {
        out.push(family(Family::Path { n }));
        out.push(family(Family::Cycle { n }));
    }
    for n in 3..=8 {
        out.push(family(Family::Complete { n }));
    }
    for (n, k) in [(8, 4), (10, 3), (10, 4), (12, 5)] {
        out.push(family(Family::Circulant { n, k }));
    }
    out.push(family(Family::Petersen));
    for (i, n) in [10usize, 14, 20].into_iter().enumerate() {
        let sc = generate_scenario(1000, i as u64, n, 4).unwrap();
        out.push((format!("geometric n={n}"), sc.graph));
    }
    out
}

#[test]
fn c01_invariant_suite() {
    let mut graphs: Vec<(String, Graph)> = Vec::new();
    for n in 3..=12 {
        graphs.push(family(Family::Path { n }));
        graphs.push(family(Family::Cycle { n }));
        graphs.push(family(Family::Complete { n }));
    }
    graphs.push(family(Family::Petersen));
    for n in 10..=30 {
        let sc = generate_scenario(2024, n as u64, n, 4).unwrap();
        graphs.push((format!("geometric n={n}"), sc.graph));
    }
    let tol = 1e-9;
    let mut failures = Vec::new();
    let mut trajectories = 0;
    for (name, g) in &graphs {
        let w = Weights::compute(g);
        for rep in 0..2u64 {
            trajectories += 1;
            let y = uniform_y(g.n(), 7 * rep + g.n() as u64);
            let mut s = HopwiseState::init(g, &w, &y).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(rep);
            let v0 = s.lyapunov(&w);
            let sum0 = s.conserved_sum(&w);
            let floor = v0.max(f64::MIN_POSITIVE);
            let mut v_prev = v0;
            for k in 1..=200 {
                let i = rng.gen_range(0..g.n());
                let receipt = s.hopwise_update(g, &w, i);
                let v = s.lyapunov(&w);
                let sum = s.conserved_sum(&w);
                if !rel_ok(sum, sum0, tol, 0.0) {
                    failures.push(format!("{name} k={k}: conserved sum {sum} vs {sum0}"));
                }
                if !rel_ok(v_prev - v, receipt.v_drop, tol, floor) {
                    failures.push(format!("{name} k={k}: drop {} vs predicted {}", v_prev - v, receipt.v_drop));
                }
                if v > v_prev + tol * floor {
                    failures.push(format!("{name} k={k}: V rose from {v_prev} to {v}"));
                }
                if !rel_ok(v, s.lyapunov_decomposition(&w), tol, floor) {
                    failures.push(format!("{name} k={k}: decomposition mismatch"));
                }
                if !s.copies_coherent() {
                    failures.push(format!("{name} k={k}: link copies diverged"));
                }
                v_prev = v;
            }
        }
    }
    assert!(trajectories >= 100);
    report(
        "C1",
        &format!("conservation, drop equality, monotonicity, decomposition, coherence on {trajectories} trajectories"),
        &failures,
    );
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] != 0.0 {
                for j in 0..n {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    c
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn c02_idempotent_and_commuting_updates() {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (name, g) in fixture_graphs().into_iter().filter(|(_, g)| g.num_links() <= 20) {
        checked += 1;
        let w = Weights::compute(&g);
        let mats: Vec<_> = (0..g.n()).map(|i| update_matrix(&g, &w, i).unwrap()).collect();
        for i in 0..g.n() {
            let d = max_diff(&mat_mul(&mats[i], &mats[i]), &mats[i]);
            if d > 1e-12 {
                failures.push(format!("{name}: A_{i}^2 differs by {d:e}"));
            }
            for j in i + 1..g.n() {
                if g.are_adjacent(i, j) {
                    continue;
                }
                let d = max_diff(&mat_mul(&mats[i], &mats[j]), &mat_mul(&mats[j], &mats[i]));
                if d > 1e-12 {
                    failures.push(format!("{name}: A_{i} A_{j} commutator {d:e}"));
                }
            }
        }
    }
    report("C2", &format!("update matrices idempotent and commuting on {checked} graphs"), &failures);
}

#[test]
fn c03_bound_consistency() {
    let mut failures = Vec::new();
    let general = |g: &Graph| gamma_general(&g.invariants(), &Weights::compute(g)).value;
    for n in 3..=10 {
        let g = Graph::family(Family::Complete { n }).unwrap();
        let v = general(&g);
        if v != 1.5 * n as f64 - 1.0 {
            failures.push(format!("complete n={n}: {v} != {}", 1.5 * n as f64 - 1.0));
        }
    }
    for n in 5..=40 {
        let g = Graph::family(Family::Path { n }).unwrap();
        let closed = gamma_closed_for_graph(&g).unwrap().family.unwrap().value;
        if !rel_ok(general(&g), closed, 1e-9, 0.0) {
            failures.push(format!("path n={n}: {} vs {closed}", general(&g)));
        }
    }
    for n in 3..=40 {
        let g = Graph::family(Family::Cycle { n }).unwrap();
        let closed = gamma_closed_for_graph(&g).unwrap().family.unwrap().value;
        if !rel_ok(general(&g), closed, 1e-9, 0.0) {
            failures.push(format!("cycle n={n}: {} vs {closed}", general(&g)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for index in 0..100u64 {
        let n = rng.gen_range(20..=50);
        let d = [6, 8, 10][rng.gen_range(0..3)];
        let g = generate_scenario(77, index, n, d).unwrap().graph;
        let v = general(&g);
        let (lo, hi) = gamma_general_range(n);
        if !(lo <= v && v <= hi) {
            failures.push(format!("geometric n={n} d={d}: {v} outside [{lo}, {hi}]"));
        }
    }
    report("C3", "general bound matches closed forms and stays in range", &failures);
}

/// Stop checking once `V` is this small relative to its start; below it the
/// rounding in `V` itself dominates the per-step change.
const V_FLOOR: f64 = 1e-12;
const SLACK: f64 = 1e-9;

struct TrajectoryCheck {
    contraction: Vec<String>,
    envelope: Vec<String>,
    steps: usize,
}

fn check_trajectory(name: &str, g: &Graph, y: &[f64], controlled: bool, seed: u64, out: &mut TrajectoryCheck) {
    let w = Weights::compute(g);
    let mut gammas = vec![("general", gamma_general(&g.invariants(), &w).value)];
    if let Some(cb) = gamma_closed_for_graph(g) {
        if let Ok(b) = cb.refined {
            gammas.push(("refined", b.value));
        }
    }
    let inv = g.invariants();
    let mut s = HopwiseState::init(g, &w, y).unwrap();
    let x_star = s.oracle_average();
    let v0 = s.lyapunov(&w);
    let mut cfg = AlgorithmConfig::new(AlgorithmKind::Cha);
    cfg.cha_eps = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sched = cha_schedule_init(&s, &cfg, &mut rng);
    let tag = if controlled { "cha" } else { "icha" };
    let mut v_prev = v0;
    let mut t_prev = 0.0;
    for k in 1..=50_000u64 {
        if v_prev <= V_FLOOR * v0 {
            break;
        }
        let t = if controlled {
            if sched.all_idle() {
                break;
            }
            step_cha(&mut s, g, &w, &mut sched, &cfg, &mut rng).unwrap().event_time
        } else {
            if step_icha(&mut s, g, &w).terminated {
                break;
            }
            None
        };
        out.steps += 1;
        let v = s.lyapunov(&w);
        let link_err = s.link_values().iter().map(|x| (x - x_star).powi(2)).sum::<f64>().sqrt();
        let est_err = s.estimates().iter().map(|x| (x - x_star).powi(2)).sum::<f64>().sqrt();
        for &(label, gamma) in &gammas {
            let bound = (1.0 - 1.0 / gamma) * v_prev;
            if v > bound * (1.0 + SLACK) {
                out.contraction.push(format!("{tag} {name} {label} k={k}: V={v:e} > {bound:e}"));
            }
            let (lb, eb) = error_envelope(v0, &inv, gamma, k);
            if link_err > lb * (1.0 + SLACK) {
                out.envelope.push(format!("{tag} {name} {label} k={k}: link error {link_err:e} > {lb:e}"));
            }
            if est_err > eb * (1.0 + SLACK) {
                out.envelope.push(format!("{tag} {name} {label} k={k}: estimate error {est_err:e} > {eb:e}"));
            }
            if let Some(t) = t {
                let cap = (gamma - 1.0) * cfg.cha_phi.inverse(t);
                if v > cap * (1.0 + SLACK) {
                    out.contraction.push(format!("{tag} {name} {label} k={k}: V={v:e} > (gamma-1)/t = {cap:e}"));
                }
            }
        }
        if let Some(t) = t {
            if t < t_prev {
                out.contraction.push(format!("{tag} {name} k={k}: event time fell from {t_prev} to {t}"));
            }
            t_prev = t;
        }
        v_prev = v;
    }
}

fn contraction_runs() -> TrajectoryCheck {
    let mut out = TrajectoryCheck {
        contraction: Vec::new(),
        envelope: Vec::new(),
        steps: 0,
    };
    for (gi, (name, g)) in fixture_graphs().iter().enumerate() {
        for rep in 0..10u64 {
            let y = uniform_y(g.n(), 1000 * gi as u64 + rep);
            check_trajectory(name, g, &y, false, rep, &mut out);
            check_trajectory(name, g, &y, true, rep, &mut out);
        }
    }
    out
}

#[test]
fn c04_contraction() {
    let out = contraction_runs();
    report(
        "C4",
        &format!("per-iteration contraction and event-time bound over {} iterations", out.steps),
        &out.contraction,
    );
}

#[test]
fn c05_error_envelopes() {
    let out = contraction_runs();
    report(
        "C5",
        &format!("link and estimate error envelopes over {} iterations", out.steps),
        &out.envelope,
    );
}

#[test]
fn c06_pairwise_ratio_limit() {
    let ratio = |n: usize| gamma_two_iteration(1.5 * n as f64 - 1.0) / gamma_pa_complete(n);
    let mut failures = Vec::new();
    let r1000 = ratio(1000);
    if !(0.74..=0.76).contains(&r1000) {
        failures.push(format!("ratio at n=1000 is {r1000}"));
    }
    if !(ratio(10) > ratio(100) && ratio(100) > r1000) {
        failures.push(format!("not decreasing: {} {} {r1000}", ratio(10), ratio(100)));
    }
    report("C6", &format!("complete-graph ratio {r1000:.4} at n=1000, decreasing"), &failures);
}

#[test]
fn c07_dense_network_ordering() {
    let seed = 42;
    let kinds = vec![
        AlgorithmKind::Rha,
        AlgorithmKind::Cha,
        AlgorithmKind::Pa,
        AlgorithmKind::Cp,
        AlgorithmKind::A2,
        AlgorithmKind::Drg,
    ];
    let table = run_sweep(&SweepConfig::new(vec![100], vec![20], 10, kinds, seed)).unwrap();
    let mean = |k| table.row(100, 20, k).unwrap().mean_transmissions;
    let (cha, rha, drg, pa, a2, cp) = (
        mean(AlgorithmKind::Cha),
        mean(AlgorithmKind::Rha),
        mean(AlgorithmKind::Drg),
        mean(AlgorithmKind::Pa),
        mean(AlgorithmKind::A2),
        mean(AlgorithmKind::Cp),
    );
    let mut cp_cfg = SweepConfig::new(vec![100], vec![20], 10, vec![AlgorithmKind::Cp], seed);
    cp_cfg.budget = Some(10_000);
    let cp_capped = run_sweep(&cp_cfg).unwrap().rows[0].converged_fraction;
    println!(
        "       means: cha {cha} rha {rha} drg {drg} pa {pa} a2 {a2} cp {cp}; cp converged at 10000: {cp_capped}"
    );
    let mut failures = Vec::new();
    let mut need = |ok: bool, msg: String| {
        if !ok {
            failures.push(msg);
        }
    };
    need(cha < rha, format!("cha {cha} !< rha {rha}"));
    need(cha < drg, format!("cha {cha} !< drg {drg}"));
    need(drg < pa.min(a2), format!("drg {drg} !< min(pa, a2) {}", pa.min(a2)));
    need(pa.min(a2) < cp, format!("min(pa, a2) {} !< cp {cp}", pa.min(a2)));
    need((900.0..=1900.0).contains(&cha), format!("cha mean {cha} outside [900, 1900]"));
    need((1400.0..=3000.0).contains(&drg), format!("drg mean {drg} outside [1400, 3000]"));
    need((4500.0..=9800.0).contains(&pa), format!("pa mean {pa} outside [4500, 9800]"));
    need((4500.0..=9800.0).contains(&a2), format!("a2 mean {a2} outside [4500, 9800]"));
    need(cp_capped == 0.0, format!("cp converged fraction {cp_capped} at a 10000 budget, expected 0"));
    report("C7", "n=100, degree 20: ordering, mean ranges, cp capped", &failures);
}

#[test]
fn c08_sparse_network_advantage() {
    let kinds = vec![AlgorithmKind::Rha, AlgorithmKind::Cha, AlgorithmKind::Drg];
    let table = run_sweep(&SweepConfig::new(vec![100], vec![10], 50, kinds, 7)).unwrap();
    let mean = |k| table.row(100, 10, k).unwrap().mean_transmissions;
    let (cha, rha, drg) = (mean(AlgorithmKind::Cha), mean(AlgorithmKind::Rha), mean(AlgorithmKind::Drg));
    println!("       means: cha {cha} rha {rha} drg {drg}");
    let mut failures = Vec::new();
    if cha > 0.8 * drg {
        failures.push(format!("cha {cha} > 0.8 * drg {drg}"));
    }
    for (name, m) in [("cha", cha), ("rha", rha), ("drg", drg)] {
        if m >= 10_000.0 {
            failures.push(format!("{name} mean {m} not below n^2"));
        }
    }
    report("C8", &format!("n=100, degree 10: cha/drg = {:.3}", cha / drg), &failures);
}

#[test]
fn c09_random_hopwise_converges() {
    let mut failures = Vec::new();
    for seed in 0..50u64 {
        let sc = generate_scenario(seed, 0, 20, 6).unwrap();
        let r = run_once(&sc, AlgorithmConfig::new(AlgorithmKind::Rha), &RunOptions::default()).unwrap();
        if !r.converged {
            failures.push(format!("seed {seed}: not converged within {}", r.transmissions));
        }
    }
    report(
        "C9",
        &format!("rha converges within 3n^2 on 50 seeds ({} of 50 did)", 50 - failures.len()),
        &failures,
    );
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hopwise")).args(args).output().unwrap()
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn c10_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    let s = |name: &str| p(name).to_str().unwrap().to_string();
    let mut failures = Vec::new();

    for tag in ["a", "b"] {
        run_cli(&["simulate", "--algo", "cha", "--graph", "geometric:60,6", "--seed", "3",
            "--trace", &s(&format!("trace_{tag}.csv")), "--out", &s(&format!("run_{tag}.csv"))]);
        run_cli(&["simulate", "--algo", "a2", "--graph", "family:petersen", "--seed", "5",
            "--trace", &s(&format!("a2_{tag}.csv"))]);
        run_cli(&["bounds", "--graph", "geometric:30,6", "--seed", "2", "--csv", &s(&format!("bounds_{tag}.csv"))]);
    }
    for (threads, tag) in [("1", "a"), ("4", "b")] {
        let out = run_cli(&["sweep", "--n", "40,50", "--avg-degree", "6", "--scenarios", "6",
            "--algos", "cha,drg,pa,a2,rha,cp,icha", "--seed", "5", "--threads", threads,
            "--out", &s(&format!("sweep_{tag}.csv")), "--runs-out", &s(&format!("runs_{tag}.csv"))]);
        if !out.status.success() {
            failures.push(format!("sweep exited with {:?}", out.status));
        }
    }
    for name in ["trace", "run", "a2", "bounds", "sweep", "runs"] {
        let a = read(&p(&format!("{name}_a.csv")));
        let b = read(&p(&format!("{name}_b.csv")));
        if a.is_empty() || a != b {
            failures.push(format!("{name} outputs differ or are empty"));
        }
    }
    report("C10", "repeated CLI runs give byte-identical CSV, including parallel sweeps", &failures);
}

/// Full density grid of the sparse-advantage experiment: several minutes.
#[test]
#[ignore]
fn full_density_grid() {
    let ns = vec![100, 200, 300, 400, 500];
    let degrees = vec![10, 20, 30, 40, 50, 60];
    let table = run_sweep(&SweepConfig::new(ns.clone(), degrees.clone(), 50, AlgorithmKind::ALL.to_vec(), 7)).unwrap();
    let mut failures = Vec::new();
    for &n in &ns {
        for &d in &degrees {
            let m = |k| table.row(n, d, k).unwrap().mean_transmissions;
            let (cha, drg) = (m(AlgorithmKind::Cha), m(AlgorithmKind::Drg));
            println!("       n={n} d={d}: cha {cha} drg {drg} rha {}", m(AlgorithmKind::Rha));
            if cha > 0.8 * drg {
                failures.push(format!("n={n} d={d}: cha {cha} > 0.8 * drg {drg}"));
            }
        }
    }
    report("grid", "cha at least 20% cheaper than drg on every cell", &failures);
}
