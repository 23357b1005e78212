use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: self-loop on vertex {vertex} rejected")]
    SelfLoop { line: usize, vertex: u64 },

    #[error("vertex {vertex} is outside the graph (n = {n})")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("edge {edge} is outside the graph (m = {m})")]
    UnknownEdge { edge: usize, m: usize },

    #[error("probability {0} is outside (0, 1]")]
    InvalidProbability(f64),

    #[error("priorities cover {got} edges but the graph has {expected}")]
    MissingPriority { expected: usize, got: usize },

    #[error("vertex universes differ ({left} vs {right})")]
    UniverseMismatch { left: usize, right: usize },

    #[error("partition count must be at least 1")]
    ZeroPartitions,

    #[error("matching is not maximal: edge {edge} has both endpoints unmatched")]
    NotMaximal { edge: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("instance too large for exact search: {0}")]
    TooLarge(String),

    #[error("max degree {max_degree} is at or below the terminal constant {terminal}; finish directly")]
    AtTerminalDegree { max_degree: usize, terminal: usize },

    #[error("degree reduction failed: residual max degree {residual} >= threshold {threshold:.3}")]
    PhaseFailure { residual: usize, threshold: f64 },

    #[error("driver gave up after {attempts} attempts at phase {phase}: {last}")]
    DriverFailure {
        phase: usize,
        attempts: usize,
        last: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
