//! Message-passing simulator.
//!
//! Agents are isolated state machines that only interact through messages
//! delivered by one of three drivers:
//!
//! * [`ScheduleMode::Deterministic`]: one global FIFO queue, messages are
//!   delivered in the order they were sent. Identical inputs give identical
//!   runs.
//! * [`ScheduleMode::Async`]: a seeded scheduler picks any non-empty
//!   channel, optionally holding messages back for a random number of ticks.
//!   Each ordered `(sender, receiver)` channel stays FIFO.
//! * [`ScheduleMode::Threaded`]: one OS thread per agent, each draining its
//!   own mailbox.
//!
//! The run ends once every queue is empty; by then every agent must have
//! processed `TERMINATE`.

mod driver;
mod message;
mod metrics;
mod trace;

use serde::{Deserialize, Serialize};

pub use self::driver::run;
pub use self::message::{Estimate, Message, MessageKind, Payload};
pub use self::metrics::{AgentClock, Metrics};
pub use self::trace::{Trace, TraceEvent};

use crate::assignment::PartialAssignment;
use crate::model::{AgentId, Cost, Problem, Value};
use crate::timestamp::Timestamp;

/// Default cap on the number of messages of a single run.
pub const DEFAULT_MESSAGE_BUDGET: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScheduleMode {
    Deterministic,
    Async {
        seed: u64,
        /// Each message is held back `0..=max_delay` scheduler ticks.
        max_delay: u32,
    },
    Threaded,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: ScheduleMode,
    pub message_budget: u64,
    pub trace: bool,
    /// Keep every CPA produced by an assignment.
    pub record_cpas: bool,
    /// Keep the bound observations agents report through [`Context::probe`].
    pub probes: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: ScheduleMode::Deterministic,
            message_budget: DEFAULT_MESSAGE_BUDGET,
            trace: false,
            record_cpas: false,
            probes: false,
        }
    }
}

impl RunConfig {
    pub fn with_mode(mode: ScheduleMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }
}

/// Best full assignment broadcast during the run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub cost: Cost,
    pub values: Vec<Value>,
}

/// A bound an agent computed, kept for offline admissibility checks.
#[derive(Clone, Debug)]
pub enum Probe {
    /// `pa.cost() + f(value)` for `agent = value` on top of `pa`.
    ValueBound {
        agent: AgentId,
        pa: PartialAssignment,
        value: Value,
        bound: Cost,
    },
    /// A responder's reply to a forward-bounding request for `pa`.
    Estimate {
        responder: AgentId,
        pa: PartialAssignment,
        estimate: Estimate,
    },
    /// `cpa.cost() + Σ estimates`, where `cpa` includes the agent's value.
    EstimateSum {
        agent: AgentId,
        cpa: PartialAssignment,
        bound: Cost,
    },
    /// Full-assignment lower bound for `agent = value` over the first
    /// `k` agents of `cpa` (which excludes `agent`).
    Falb {
        agent: AgentId,
        cpa: PartialAssignment,
        k: usize,
        value: Value,
        bound: Cost,
    },
    /// A backjump skipped `target`: no completion of the bindings of agents
    /// `< target` should beat `upper`.
    Skip {
        agent: AgentId,
        target: AgentId,
        prefix: PartialAssignment,
        upper: Cost,
    },
}

#[derive(Debug, Default)]
pub(crate) struct Recorder {
    record_cpas: bool,
    probes: bool,
    pub(crate) cpas: Vec<Vec<(AgentId, Value)>>,
    pub(crate) events: Vec<Probe>,
}

impl Recorder {
    pub(crate) fn new(config: &RunConfig) -> Self {
        Self {
            record_cpas: config.record_cpas,
            probes: config.probes,
            ..Self::default()
        }
    }
}

/// An outgoing message before the kernel attaches clocks.
#[derive(Debug)]
pub(crate) struct Outgoing {
    pub(crate) to: AgentId,
    pub(crate) stamp: Timestamp,
    pub(crate) payload: Payload,
    pub(crate) ncccs: u64,
}

/// Agent-side handle for one init or message-handling event.
pub struct Context<'a> {
    id: AgentId,
    problem: &'a Problem,
    ncccs: u64,
    outbox: &'a mut Vec<Outgoing>,
    recorder: &'a mut Recorder,
    terminations: u64,
}

impl<'a> Context<'a> {
    pub(crate) fn new(
        id: AgentId,
        problem: &'a Problem,
        ncccs: u64,
        outbox: &'a mut Vec<Outgoing>,
        recorder: &'a mut Recorder,
    ) -> Self {
        Self {
            id,
            problem,
            ncccs,
            outbox,
            recorder,
            terminations: 0,
        }
    }

    pub fn id(&self) -> AgentId {
        self.id
    }

    pub fn agent_count(&self) -> usize {
        self.problem.agent_count()
    }

    pub fn domain_size(&self, agent: AgentId) -> usize {
        self.problem.domain_size(agent)
    }

    /// Whether the two agents share a constraint (structural knowledge, free).
    pub fn is_constrained(&self, i: AgentId, j: AgentId) -> bool {
        self.problem.is_constrained(i, j)
    }

    /// Metered constraint read: each read of an existing table is one check.
    pub fn cost(&mut self, i: AgentId, v: Value, j: AgentId, u: Value) -> Cost {
        if !self.problem.is_constrained(i, j) {
            return 0;
        }
        self.ncccs += 1;
        self.problem.cost(i, v, j, u)
    }

    pub fn send(&mut self, to: AgentId, stamp: Timestamp, payload: Payload) {
        debug_assert_ne!(to, self.id, "agents never message themselves");
        self.outbox.push(Outgoing {
            to,
            stamp,
            payload,
            ncccs: self.ncccs,
        });
    }

    /// Point-to-point copies to every other agent.
    pub fn broadcast(&mut self, stamp: Timestamp, payload: Payload) {
        if matches!(payload, Payload::Terminate) {
            self.terminations += 1;
        }
        let me = self.id;
        for to in (0..self.agent_count()).filter(|&a| a != me) {
            self.send(to, stamp.clone(), payload.clone());
        }
    }

    pub fn record_cpa(&mut self, cpa: &PartialAssignment) {
        if self.recorder.record_cpas {
            self.recorder.cpas.push(cpa.bindings().to_vec());
        }
    }

    pub fn probing(&self) -> bool {
        self.recorder.probes
    }

    /// Records a probe; `make` runs only when probing is enabled.
    pub fn probe(&mut self, make: impl FnOnce() -> Probe) {
        if self.recorder.probes {
            self.recorder.events.push(make());
        }
    }

    pub(crate) fn ncccs(&self) -> u64 {
        self.ncccs
    }

    pub(crate) fn terminations(&self) -> u64 {
        self.terminations
    }
}

/// A solver agent owning one variable.
pub trait Agent: Send {
    fn init(&mut self, ctx: &mut Context<'_>);

    fn handle(&mut self, msg: &Message, ctx: &mut Context<'_>);

    fn is_terminated(&self) -> bool;

    /// Best full assignment this agent knows of.
    fn best(&self) -> Option<&PartialAssignment>;
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub solution: Solution,
    pub metrics: Metrics,
    pub trace: Option<Trace>,
    /// Bindings of every CPA produced by an assignment, when recorded.
    pub generated_cpas: Vec<Vec<(AgentId, Value)>>,
    pub probes: Vec<Probe>,
    /// Number of TERMINATE broadcasts initiated.
    pub terminate_broadcasts: u64,
}
