//! Distributed averaging over wireless networks with hopwise link-state
//! updates, the gossip baselines they are compared against, convergence
//! bounds, and a simulation harness.
//!
//! A network is a connected undirected [`Graph`]; each node holds one real
//! observation and every algorithm drives all node estimates toward the
//! network-wide average while counting the real numbers transmitted.

pub mod algorithms;
pub mod bounds;
pub mod error;
pub mod graph;
pub mod harness;
pub mod hopwise;
pub mod numeric;

pub use algorithms::{AlgorithmConfig, AlgorithmKind, AlgorithmRun, StepOutcome, StepResult};
pub use error::{AlgorithmError, GraphError, HarnessError};
pub use graph::{Family, FamilyTag, Graph, GraphInvariants};
pub use harness::{RunOptions, RunResult, Scenario, SweepConfig, SweepTable};
pub use hopwise::{HopwiseState, Weights};
