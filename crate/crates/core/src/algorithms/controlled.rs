//! Random, ideal-controlled and controlled hopwise initiator selection.

use rand::distributions::Open01;
use rand::Rng;

use super::{AlgorithmConfig, Initiator, StepOutcome};
use crate::error::AlgorithmError;
use crate::graph::{Graph, NodeId};
use crate::hopwise::{HopwiseState, Weights};

/// Per-node event times of the controlled hopwise algorithm. A node with
/// an infinite time will not initiate until a neighbor wakes it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaSchedule {
    tau: Vec<f64>,
    t_now: f64,
}

impl ChaSchedule {
    pub fn event_times(&self) -> &[f64] {
        &self.tau
    }

    /// Time of the last processed event (0 before the first).
    pub fn now(&self) -> f64 {
        self.t_now
    }

    pub fn all_idle(&self) -> bool {
        self.tau.iter().all(|t| t.is_infinite())
    }
}

fn jitter<R: Rng + ?Sized>(base: f64, eps: f64, rng: &mut R) -> f64 {
    if base.is_infinite() || eps == 0.0 {
        base
    } else {
        let r: f64 = rng.sample(Open01);
        base + eps * r
    }
}

/// `tau_i = phi(dv_i) + eps * r_i`, drawn in node order.
pub fn cha_schedule_init<R: Rng + ?Sized>(
    state: &HopwiseState,
    cfg: &AlgorithmConfig,
    rng: &mut R,
) -> ChaSchedule {
    let tau = state
        .potential_drops()
        .iter()
        .map(|&dv| jitter(cfg.cha_phi.phi(dv), cfg.cha_eps, rng))
        .collect();
    ChaSchedule { tau, t_now: 0.0 }
}

/// Uniform initiator.
pub fn step_rha<R: Rng + ?Sized>(
    state: &mut HopwiseState,
    g: &Graph,
    w: &Weights,
    rng: &mut R,
) -> StepOutcome {
    let i = rng.gen_range(0..g.n());
    let receipt = state.hopwise_update(g, w, i);
    StepOutcome {
        transmissions: receipt.transmissions,
        initiator: Some(Initiator::Node(i)),
        terminated: false,
        event_time: None,
    }
}

/// Node with the largest potential drop, lowest id on ties. Reports
/// termination once every drop is exactly zero.
pub fn step_icha(state: &mut HopwiseState, g: &Graph, w: &Weights) -> StepOutcome {
    let mut best: Option<(NodeId, f64)> = None;
    for (i, &dv) in state.potential_drops().iter().enumerate() {
        if best.map_or(true, |(_, b)| dv > b) {
            best = Some((i, dv));
        }
    }
    match best {
        Some((i, dv)) if dv > 0.0 => {
            let receipt = state.hopwise_update(g, w, i);
            StepOutcome {
                transmissions: receipt.transmissions,
                initiator: Some(Initiator::Node(i)),
                terminated: false,
                event_time: None,
            }
        }
        _ => StepOutcome::done(),
    }
}

/// Processes the earliest event. Ties are broken uniformly at random; a
/// random draw is only made when more than one node shares the minimum.
pub fn step_cha<R: Rng + ?Sized>(
    state: &mut HopwiseState,
    g: &Graph,
    w: &Weights,
    schedule: &mut ChaSchedule,
    cfg: &AlgorithmConfig,
    rng: &mut R,
) -> Result<StepOutcome, AlgorithmError> {
    let t = schedule.tau.iter().copied().fold(f64::INFINITY, f64::min);
    if t.is_infinite() {
        return Err(AlgorithmError::NoPendingEvent);
    }
    let ties: Vec<NodeId> = (0..g.n()).filter(|&i| schedule.tau[i] == t).collect();
    let i = if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng.gen_range(0..ties.len())]
    };
    let receipt = state.hopwise_update(g, w, i);
    schedule.t_now = t;
    schedule.tau[i] = f64::INFINITY;
    for &(j, _) in g.neighbors(i) {
        let base = cfg.cha_phi.phi(state.cached_delta_v(j)).max(t);
        schedule.tau[j] = jitter(base, cfg.cha_eps, rng);
    }
    Ok(StepOutcome {
        transmissions: receipt.transmissions,
        initiator: Some(Initiator::Node(i)),
        terminated: schedule.all_idle(),
        event_time: Some(t),
    })
}
