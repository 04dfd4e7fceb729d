//! Gossip baselines: pairwise averaging, consensus propagation, the A2
//! difference-tracking scheme and distributed random grouping.
//!
//! Directed link `2e` runs from the lower endpoint of link `e` to the
//! higher one, `2e + 1` the other way.

use rand::Rng;

use super::{Initiator, StepOutcome};
use crate::graph::{Graph, LinkId, NodeId};

fn directed(g: &Graph, d: usize) -> (NodeId, NodeId) {
    let (u, v) = g.link(d / 2);
    if d % 2 == 0 {
        (u, v)
    } else {
        (v, u)
    }
}

/// Id of the directed link `from -> to` carried by link `e`.
fn directed_id(g: &Graph, e: LinkId, from: NodeId) -> usize {
    if g.link(e).0 == from {
        2 * e
    } else {
        2 * e + 1
    }
}

fn link_step(initiator: Initiator, transmissions: u64) -> StepOutcome {
    StepOutcome {
        transmissions,
        initiator: Some(initiator),
        terminated: false,
        event_time: None,
    }
}

/// Per-node estimates only; used by pairwise averaging and random grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct GossipState {
    x_hat: Vec<f64>,
}

impl GossipState {
    pub fn new(y: &[f64]) -> Self {
        GossipState { x_hat: y.to_vec() }
    }

    pub fn estimates(&self) -> &[f64] {
        &self.x_hat
    }
}

/// Uniform link; both endpoints take the mean.
pub fn step_pa<R: Rng + ?Sized>(st: &mut GossipState, g: &Graph, rng: &mut R) -> StepOutcome {
    let e = rng.gen_range(0..g.num_links());
    let (u, v) = g.link(e);
    let mean = 0.5 * (st.x_hat[u] + st.x_hat[v]);
    st.x_hat[u] = mean;
    st.x_hat[v] = mean;
    link_step(Initiator::Link(u, v), 2)
}

/// Uniform leader; the leader and its neighbors take their group mean.
pub fn step_drg<R: Rng + ?Sized>(st: &mut GossipState, g: &Graph, rng: &mut R) -> StepOutcome {
    let leader = rng.gen_range(0..g.n());
    drg_group_average(st, g, leader)
}

pub(crate) fn drg_group_average(st: &mut GossipState, g: &Graph, leader: NodeId) -> StepOutcome {
    let nbrs = g.neighbors(leader);
    let sum = st.x_hat[leader] + nbrs.iter().map(|&(j, _)| st.x_hat[j]).sum::<f64>();
    let mean = sum / (nbrs.len() + 1) as f64;
    st.x_hat[leader] = mean;
    for &(j, _) in nbrs {
        st.x_hat[j] = mean;
    }
    StepOutcome {
        transmissions: nbrs.len() as u64 + 1,
        initiator: Some(Initiator::Node(leader)),
        terminated: false,
        event_time: None,
    }
}

/// Consensus propagation messages: a precision `k` and a mean `mu` per
/// directed link, stored at the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct CpState {
    y: Vec<f64>,
    k: Vec<f64>,
    mu: Vec<f64>,
    x_hat: Vec<f64>,
}

impl CpState {
    pub fn new(g: &Graph, y: &[f64]) -> Self {
        let m = 2 * g.num_links();
        CpState {
            y: y.to_vec(),
            k: vec![0.0; m],
            mu: vec![0.0; m],
            x_hat: y.to_vec(),
        }
    }

    pub fn estimates(&self) -> &[f64] {
        &self.x_hat
    }

    /// Precision and mean last received over `from -> to`.
    pub fn message(&self, g: &Graph, from: NodeId, to: NodeId) -> Option<(f64, f64)> {
        let &(_, e) = g.neighbors(from).iter().find(|&&(j, _)| j == to)?;
        let d = directed_id(g, e, from);
        Some((self.k[d], self.mu[d]))
    }

    /// Sums of `K` and `K mu` over messages arriving at `i`, optionally
    /// leaving out the one from `skip`.
    fn incoming(&self, g: &Graph, i: NodeId, skip: Option<NodeId>) -> (f64, f64) {
        let mut k_sum = 0.0;
        let mut km_sum = 0.0;
        for &(l, e) in g.neighbors(i) {
            if Some(l) == skip {
                continue;
            }
            let d = directed_id(g, e, l);
            k_sum += self.k[d];
            km_sum += self.k[d] * self.mu[d];
        }
        (k_sum, km_sum)
    }
}

/// Uniform directed link `i -> j`; `i` sends its outgoing precision and
/// mean, `j` stores them and re-estimates. `beta = inf` drops the damping
/// term.
pub fn step_cp<R: Rng + ?Sized>(st: &mut CpState, g: &Graph, beta: f64, rng: &mut R) -> StepOutcome {
    let d = rng.gen_range(0..2 * g.num_links());
    let (i, j) = directed(g, d);
    let (k_sum, km_sum) = st.incoming(g, i, Some(j));
    let precision = 1.0 + k_sum;
    let f = if beta.is_infinite() {
        precision
    } else {
        precision / (1.0 + precision / beta)
    };
    let gm = (st.y[i] + km_sum) / precision;
    st.k[d] = f;
    st.mu[d] = gm;
    let (k_all, km_all) = st.incoming(g, j, None);
    st.x_hat[j] = (st.y[j] + km_all) / (1.0 + k_all);
    link_step(Initiator::Link(i, j), 2)
}

/// Per-directed-link correction terms and per-node estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct A2State {
    y: Vec<f64>,
    delta: Vec<f64>,
    delta_sum: Vec<f64>,
    degree: Vec<usize>,
    x_hat: Vec<f64>,
}

impl A2State {
    pub fn new(g: &Graph, y: &[f64]) -> Self {
        A2State {
            y: y.to_vec(),
            delta: vec![0.0; 2 * g.num_links()],
            delta_sum: vec![0.0; g.n()],
            degree: (0..g.n()).map(|i| g.degree(i)).collect(),
            x_hat: y.to_vec(),
        }
    }

    pub fn estimates(&self) -> &[f64] {
        &self.x_hat
    }

    /// Correction held by `at` for its link to `other`.
    pub fn correction(&self, g: &Graph, at: NodeId, other: NodeId) -> Option<f64> {
        let &(_, e) = g.neighbors(at).iter().find(|&&(j, _)| j == other)?;
        Some(self.delta[directed_id(g, e, at)])
    }

    pub fn correction_sums(&self) -> &[f64] {
        &self.delta_sum
    }
}

/// Uniform directed link `i -> j`: `i` sends its estimate, `j` shifts the
/// pair of corrections and returns the shift; then every node relaxes
/// toward its observation plus its correction sum.
pub fn step_a2<R: Rng + ?Sized>(
    st: &mut A2State,
    g: &Graph,
    gamma: f64,
    phi: f64,
    rng: &mut R,
) -> StepOutcome {
    let d = rng.gen_range(0..2 * g.num_links());
    let (i, j) = directed(g, d);
    let shift = phi * (st.x_hat[i] - st.x_hat[j]);
    let at_j = d ^ 1;
    st.delta[at_j] += shift;
    st.delta[d] -= shift;
    st.delta_sum[j] += shift;
    st.delta_sum[i] -= shift;
    for l in 0..g.n() {
        let step = gamma / (st.degree[l] + 1) as f64;
        st.x_hat[l] += step * (st.delta_sum[l] + st.y[l] - st.x_hat[l]);
    }
    link_step(Initiator::Link(i, j), 2)
}
