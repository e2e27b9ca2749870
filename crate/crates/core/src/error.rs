use thiserror::Error;

use crate::model::{AgentId, Value};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("agent index {agent} out of range for a problem with {agents} agents")]
    AgentOutOfRange { agent: AgentId, agents: usize },

    #[error("value index {value} out of range for agent {agent} (domain size {domain})")]
    ValueOutOfRange {
        agent: AgentId,
        value: Value,
        domain: usize,
    },

    #[error("a constraint needs two distinct agents, got {0} twice")]
    SelfConstraint(AgentId),

    #[error("agent {0} is already bound in this partial assignment")]
    AlreadyBound(AgentId),

    #[error("agent {0} is not bound in this partial assignment")]
    NotBound(AgentId),

    #[error("constraint between agents {0} and {1} declared twice")]
    DuplicateConstraint(AgentId, AgentId),

    #[error(
        "cost table for ({i}, {j}) is {rows}x{cols}, expected {expected_rows}x{expected_cols}"
    )]
    TableShape {
        i: AgentId,
        j: AgentId,
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },

    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("exact search refused: {leaves} leaves exceed the enumeration budget of {budget}")]
    BudgetExceeded { leaves: u128, budget: u128 },

    #[error("suspected nontermination: {sent} messages sent, budget is {budget}")]
    Nontermination { sent: u64, budget: u64 },

    #[error("run reached quiescence but agents {0:?} never processed TERMINATE")]
    Deadlock(Vec<AgentId>),

    #[error("run terminated without any full assignment being broadcast")]
    NoSolution,

    #[error("agent thread panicked: {0}")]
    AgentPanic(String),

    #[error("{0}")]
    Io(String),

    #[error("algorithms disagree on instance seed {seed}: {detail}")]
    Disagreement { seed: u64, detail: String },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
