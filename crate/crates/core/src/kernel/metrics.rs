//! Logical clocks for non-concurrent steps and constraint checks.
//!
//! Every agent keeps two Lamport-style counters. A message carries the
//! sender's counters at send time; on receipt the receiver takes the maximum
//! of its own and the carried value, then counts one step for handling the
//! message and one check per cost-table read performed while handling it.
//! The run's metric is the maximum final value over all agents.

use serde::Serialize;

use super::message::{Message, MessageKind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AgentClock {
    pub steps: u64,
    pub ncccs: u64,
}

impl AgentClock {
    /// Clock update for receiving `msg`, before any checks of the handler.
    pub fn account_receive(self, msg: &Message) -> AgentClock {
        self.receive(msg.nc_steps_at_send, msg.ncccs_at_send)
    }

    pub fn receive(self, steps_at_send: u64, ncccs_at_send: u64) -> AgentClock {
        AgentClock {
            steps: self.steps.max(steps_at_send) + 1,
            ncccs: self.ncccs.max(ncccs_at_send),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Metrics {
    pub nc_steps: u64,
    pub ncccs: u64,
    pub messages_total: u64,
    /// Indexed by [`MessageKind::index`].
    pub messages_by_kind: [u64; 5],
}

impl Metrics {
    pub fn messages(&self, kind: MessageKind) -> u64 {
        self.messages_by_kind[kind.index()]
    }

    pub(crate) fn count_send(&mut self, kind: MessageKind) {
        self.messages_total += 1;
        self.messages_by_kind[kind.index()] += 1;
    }

    pub(crate) fn absorb_clock(&mut self, clock: AgentClock) {
        self.nc_steps = self.nc_steps.max(clock.steps);
        self.ncccs = self.ncccs.max(clock.ncccs);
    }
}
