//! Seven averaging algorithms behind one step interface.
//!
//! The hopwise family (`rha`, `icha`, `cha`) runs on [`HopwiseState`];
//! the baselines (`pa`, `cp`, `a2`, `drg`) keep their own per-node state.
//! Every step reports how many real numbers went over the air.
//!
//! Random draws come from one seeded stream per run. Within a step the
//! initiator (node, link or tie-break) is drawn first, followed by any
//! event-time jitter draws in adjacency order.

mod baselines;
mod controlled;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use baselines::{step_a2, step_cp, step_drg, step_pa, A2State, CpState, GossipState};
pub use controlled::{cha_schedule_init, step_cha, step_icha, step_rha, ChaSchedule};

use crate::error::AlgorithmError;
use crate::graph::{Graph, NodeId};
use crate::hopwise::{HopwiseState, Weights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmKind {
    Rha,
    Icha,
    Cha,
    Pa,
    Cp,
    A2,
    Drg,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 7] = [
        AlgorithmKind::Rha,
        AlgorithmKind::Icha,
        AlgorithmKind::Cha,
        AlgorithmKind::Pa,
        AlgorithmKind::Cp,
        AlgorithmKind::A2,
        AlgorithmKind::Drg,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            AlgorithmKind::Rha => "rha",
            AlgorithmKind::Icha => "icha",
            AlgorithmKind::Cha => "cha",
            AlgorithmKind::Pa => "pa",
            AlgorithmKind::Cp => "cp",
            AlgorithmKind::A2 => "a2",
            AlgorithmKind::Drg => "drg",
        }
    }

    pub fn is_hopwise(self) -> bool {
        matches!(self, AlgorithmKind::Rha | AlgorithmKind::Icha | AlgorithmKind::Cha)
    }

    /// Real numbers exchanged before the first iteration: each node sends
    /// its degree and observation once for the hopwise family.
    pub fn init_overhead(self, n: usize) -> u64 {
        if self.is_hopwise() {
            2 * n as u64
        } else {
            0
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for AlgorithmKind {
    type Err = AlgorithmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|k| k.tag().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| AlgorithmError::InvalidParameter(format!("unknown algorithm {s:?}")))
    }
}

/// Reciprocal scheduling function `phi(v) = scale / v`, with `phi(0) = inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reciprocal {
    pub scale: f64,
}

impl Reciprocal {
    pub fn phi(self, v: f64) -> f64 {
        if v <= 0.0 {
            f64::INFINITY
        } else {
            self.scale / v
        }
    }

    pub fn inverse(self, t: f64) -> f64 {
        self.scale / t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmConfig {
    pub kind: AlgorithmKind,
    pub cha_phi: Reciprocal,
    /// Constant jitter width added to event times.
    pub cha_eps: f64,
    /// May be `f64::INFINITY`.
    pub cp_beta: f64,
    pub a2_gamma: f64,
    pub a2_phi: f64,
}

impl AlgorithmConfig {
    pub fn new(kind: AlgorithmKind) -> Self {
        AlgorithmConfig {
            kind,
            cha_phi: Reciprocal { scale: 1.0 },
            cha_eps: 0.001,
            cp_beta: 1e6,
            a2_gamma: 0.3,
            a2_phi: 0.49,
        }
    }

    pub fn validate(&self) -> Result<(), AlgorithmError> {
        let bad = |msg: String| Err(AlgorithmError::InvalidParameter(msg));
        if !(self.cha_phi.scale > 0.0 && self.cha_phi.scale.is_finite()) {
            return bad(format!("cha phi scale must be positive, got {}", self.cha_phi.scale));
        }
        if !(self.cha_eps >= 0.0 && self.cha_eps.is_finite()) {
            return bad(format!("cha eps must be >= 0, got {}", self.cha_eps));
        }
        if !(self.cp_beta > 0.0) {
            return bad(format!("cp beta must be in (0, inf], got {}", self.cp_beta));
        }
        if !(self.a2_gamma > 0.0 && self.a2_gamma < 1.0) {
            return bad(format!("a2 gamma must be in (0, 1), got {}", self.a2_gamma));
        }
        if !(self.a2_phi > 0.0 && self.a2_phi < 0.5) {
            return bad(format!("a2 phi must be in (0, 1/2), got {}", self.a2_phi));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Initiator {
    Node(NodeId),
    /// Sender and receiver of a link activation.
    Link(NodeId, NodeId),
}

impl Initiator {
    /// Node that started the iteration (the sender for link activations).
    pub fn node(self) -> NodeId {
        match self {
            Initiator::Node(i) | Initiator::Link(i, _) => i,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    /// Real numbers transmitted in this step; zero only when the step found
    /// nothing left to do.
    pub transmissions: u64,
    pub initiator: Option<Initiator>,
    /// No further iteration will ever be initiated.
    pub terminated: bool,
    /// Event time of the iteration (controlled hopwise only).
    pub event_time: Option<f64>,
}

impl StepOutcome {
    pub(crate) fn done() -> Self {
        StepOutcome {
            transmissions: 0,
            initiator: None,
            terminated: true,
            event_time: None,
        }
    }
}

/// Result of asking a run to advance within a transmission allowance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepResult {
    Advanced(StepOutcome),
    /// Nothing left to initiate.
    Terminated,
    /// The next iteration would exceed the allowance; nothing was applied.
    OverBudget { cost: u64 },
}

#[derive(Debug, Clone)]
enum Engine {
    Hopwise {
        weights: Weights,
        state: HopwiseState,
        schedule: Option<ChaSchedule>,
    },
    Gossip(GossipState),
    Cp(CpState),
    A2(A2State),
}

/// One algorithm run on one graph: owns its state and random stream.
#[derive(Debug, Clone)]
pub struct AlgorithmRun<'g> {
    graph: &'g Graph,
    config: AlgorithmConfig,
    rng: ChaCha8Rng,
    engine: Engine,
    iterations: u64,
}

impl<'g> AlgorithmRun<'g> {
    pub fn initialize(
        graph: &'g Graph,
        y: &[f64],
        config: AlgorithmConfig,
        seed: u64,
    ) -> Result<Self, AlgorithmError> {
        config.validate()?;
        if y.len() != graph.n() {
            return Err(AlgorithmError::ObservationLength {
                expected: graph.n(),
                got: y.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let engine = match config.kind {
            AlgorithmKind::Rha | AlgorithmKind::Icha | AlgorithmKind::Cha => {
                let weights = Weights::compute(graph);
                let state = HopwiseState::init(graph, &weights, y)?;
                let schedule = (config.kind == AlgorithmKind::Cha)
                    .then(|| cha_schedule_init(&state, &config, &mut rng));
                Engine::Hopwise {
                    weights,
                    state,
                    schedule,
                }
            }
            AlgorithmKind::Pa | AlgorithmKind::Drg => Engine::Gossip(GossipState::new(y)),
            AlgorithmKind::Cp => Engine::Cp(CpState::new(graph, y)),
            AlgorithmKind::A2 => Engine::A2(A2State::new(graph, y)),
        };
        Ok(AlgorithmRun {
            graph,
            config,
            rng,
            engine,
            iterations: 0,
        })
    }

    pub fn kind(&self) -> AlgorithmKind {
        self.config.kind
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn init_overhead(&self) -> u64 {
        self.config.kind.init_overhead(self.graph.n())
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    /// Current per-node estimates.
    pub fn estimates(&self) -> &[f64] {
        match &self.engine {
            Engine::Hopwise { state, .. } => state.estimates(),
            Engine::Gossip(st) => st.estimates(),
            Engine::Cp(st) => st.estimates(),
            Engine::A2(st) => st.estimates(),
        }
    }

    /// Hopwise state and weights, for diagnostics.
    pub fn hopwise(&self) -> Option<(&HopwiseState, &Weights)> {
        match &self.engine {
            Engine::Hopwise { weights, state, .. } => Some((state, weights)),
            _ => None,
        }
    }

    pub fn schedule(&self) -> Option<&ChaSchedule> {
        match &self.engine {
            Engine::Hopwise { schedule, .. } => schedule.as_ref(),
            _ => None,
        }
    }

    /// True when no further iteration can be initiated.
    pub fn is_terminated(&self) -> bool {
        match (&self.engine, self.config.kind) {
            (Engine::Hopwise { schedule: Some(s), .. }, _) => s.all_idle(),
            (Engine::Hopwise { state, .. }, AlgorithmKind::Icha) => {
                state.potential_drops().iter().all(|&dv| dv == 0.0)
            }
            _ => false,
        }
    }

    /// Advances by one iteration if its cost fits in `allowance`.
    pub fn step(&mut self, allowance: u64) -> Result<StepResult, AlgorithmError> {
        if self.is_terminated() {
            return Ok(StepResult::Terminated);
        }
        let g = self.graph;
        let cfg = self.config;
        let fixed_cost = match cfg.kind {
            AlgorithmKind::Rha | AlgorithmKind::Icha | AlgorithmKind::Cha => Some(1),
            AlgorithmKind::Pa | AlgorithmKind::Cp | AlgorithmKind::A2 => Some(2),
            AlgorithmKind::Drg => None,
        };
        if let Some(cost) = fixed_cost {
            if cost > allowance {
                return Ok(StepResult::OverBudget { cost });
            }
        }
        let outcome = match (&mut self.engine, cfg.kind) {
            (Engine::Hopwise { weights, state, .. }, AlgorithmKind::Rha) => {
                step_rha(state, g, weights, &mut self.rng)
            }
            (Engine::Hopwise { weights, state, .. }, AlgorithmKind::Icha) => step_icha(state, g, weights),
            (
                Engine::Hopwise {
                    weights,
                    state,
                    schedule: Some(schedule),
                },
                AlgorithmKind::Cha,
            ) => step_cha(state, g, weights, schedule, &cfg, &mut self.rng)?,
            (Engine::Gossip(st), AlgorithmKind::Pa) => step_pa(st, g, &mut self.rng),
            (Engine::Gossip(st), AlgorithmKind::Drg) => {
                let leader = self.rng.gen_range(0..g.n());
                let cost = g.degree(leader) as u64 + 1;
                if cost > allowance {
                    return Ok(StepResult::OverBudget { cost });
                }
                baselines::drg_group_average(st, g, leader)
            }
            (Engine::Cp(st), AlgorithmKind::Cp) => step_cp(st, g, cfg.cp_beta, &mut self.rng),
            (Engine::A2(st), AlgorithmKind::A2) => {
                step_a2(st, g, cfg.a2_gamma, cfg.a2_phi, &mut self.rng)
            }
            _ => unreachable!("engine always matches its algorithm kind"),
        };
        if outcome.transmissions == 0 && outcome.terminated {
            return Ok(StepResult::Terminated);
        }
        self.iterations += 1;
        Ok(StepResult::Advanced(outcome))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    #[test]
    fn kinds_parse_and_print() {
        for k in AlgorithmKind::ALL {
            assert_eq!(k.tag().parse::<AlgorithmKind>().unwrap(), k);
        }
        assert!("gossip".parse::<AlgorithmKind>().is_err());
        assert_eq!("CHA".parse::<AlgorithmKind>().unwrap(), AlgorithmKind::Cha);
    }

    #[test]
    fn config_validation() {
        let mut c = AlgorithmConfig::new(AlgorithmKind::A2);
        assert!(c.validate().is_ok());
        c.a2_phi = 0.5;
        assert!(c.validate().is_err());
        let mut c = AlgorithmConfig::new(AlgorithmKind::Cp);
        c.cp_beta = f64::INFINITY;
        assert!(c.validate().is_ok());
        c.cp_beta = 0.0;
        assert!(c.validate().is_err());
        let mut c = AlgorithmConfig::new(AlgorithmKind::Cha);
        c.cha_eps = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn reciprocal_schedule() {
        let phi = Reciprocal { scale: 1.0 };
        assert_eq!(phi.phi(0.0), f64::INFINITY);
        assert_eq!(phi.phi(4.0 / 3.0), 0.75);
        assert_eq!(phi.inverse(0.75), 4.0 / 3.0);
    }

    #[test]
    fn transmission_accounting_table() {
        let g = Graph::family(Family::Petersen).unwrap();
        let y: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
        for kind in AlgorithmKind::ALL {
            let mut run = AlgorithmRun::initialize(&g, &y, AlgorithmConfig::new(kind), 9).unwrap();
            for _ in 0..50 {
                match run.step(u64::MAX).unwrap() {
                    StepResult::Advanced(out) => {
                        let expected = match kind {
                            AlgorithmKind::Rha | AlgorithmKind::Icha | AlgorithmKind::Cha => 1,
                            AlgorithmKind::Pa | AlgorithmKind::Cp | AlgorithmKind::A2 => 2,
                            AlgorithmKind::Drg => 4,
                        };
                        assert_eq!(out.transmissions, expected, "{kind}");
                    }
                    StepResult::Terminated => break,
                    StepResult::OverBudget { .. } => unreachable!(),
                }
            }
        }
    }

    #[test]
    fn allowance_is_respected() {
        let g = Graph::family(Family::Complete { n: 5 }).unwrap();
        let y = [0.1, 0.2, 0.3, 0.4, 0.9];
        let mut pa = AlgorithmRun::initialize(&g, &y, AlgorithmConfig::new(AlgorithmKind::Pa), 1).unwrap();
        assert_eq!(pa.step(1).unwrap(), StepResult::OverBudget { cost: 2 });
        let mut drg = AlgorithmRun::initialize(&g, &y, AlgorithmConfig::new(AlgorithmKind::Drg), 1).unwrap();
        assert_eq!(drg.step(4).unwrap(), StepResult::OverBudget { cost: 5 });
        assert_eq!(drg.estimates(), &y);
    }

    #[test]
    fn runs_replay_from_seed() {
        let g = Graph::family(Family::Cycle { n: 9 }).unwrap();
        let y: Vec<f64> = (0..9).map(|i| (i * i % 7) as f64).collect();
        for kind in AlgorithmKind::ALL {
            let mut a = AlgorithmRun::initialize(&g, &y, AlgorithmConfig::new(kind), 77).unwrap();
            let mut b = AlgorithmRun::initialize(&g, &y, AlgorithmConfig::new(kind), 77).unwrap();
            for _ in 0..40 {
                assert_eq!(a.step(u64::MAX).unwrap(), b.step(u64::MAX).unwrap());
            }
            assert_eq!(a.estimates(), b.estimates());
        }
    }
}
