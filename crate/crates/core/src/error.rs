use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("invalid family parameters: {0}")]
    InvalidFamily(String),
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate link {{{0}, {1}}}")]
    DuplicateLink(usize, usize),
    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("link target {target} outside [{min}, {max}]")]
    LinkTargetOutOfRange { target: usize, min: usize, max: usize },
    #[error("no connected placement found after {attempts} draws; density too low")]
    Infeasible { attempts: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, PartialEq)]
pub enum AlgorithmError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("observation vector has {got} entries, graph has {expected} nodes")]
    ObservationLength { expected: usize, got: usize },
    #[error("update matrix would be {0}x{0}; limited to {1} links")]
    MatrixTooLarge(usize, usize),
    #[error("every event time is infinite; the run has already terminated")]
    NoPendingEvent,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("budget {budget} is below the initialization overhead {overhead}")]
    BudgetBelowOverhead { budget: u64, overhead: u64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
