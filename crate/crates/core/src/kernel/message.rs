use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::assignment::PartialAssignment;
use crate::model::{AgentId, Cost};
use crate::timestamp::Timestamp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum MessageKind {
    CpaMsg,
    FbCpa,
    FbEstimate,
    NewSolution,
    Terminate,
}

impl MessageKind {
    pub const ALL: [MessageKind; 5] = [
        MessageKind::CpaMsg,
        MessageKind::FbCpa,
        MessageKind::FbEstimate,
        MessageKind::NewSolution,
        MessageKind::Terminate,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            MessageKind::CpaMsg => "CPA_MSG",
            MessageKind::FbCpa => "FB_CPA",
            MessageKind::FbEstimate => "FB_ESTIMATE",
            MessageKind::NewSolution => "NEW_SOLUTION",
            MessageKind::Terminate => "TERMINATE",
        }
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MessageKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MessageKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown message kind {s:?}"))
    }
}

/// Lower bound returned by a forward-bounding responder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Estimate {
    /// Bound against the whole requested assignment.
    Scalar(Cost),
    /// Element `k` bounds against the first `k` agents of the request;
    /// length `n + 1`.
    Prefix(Vec<Cost>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Cpa(PartialAssignment),
    FbCpa(PartialAssignment),
    FbEstimate(Estimate),
    NewSolution(PartialAssignment),
    Terminate,
}

impl Payload {
    pub fn kind(&self) -> MessageKind {
        match self {
            Payload::Cpa(_) => MessageKind::CpaMsg,
            Payload::FbCpa(_) => MessageKind::FbCpa,
            Payload::FbEstimate(_) => MessageKind::FbEstimate,
            Payload::NewSolution(_) => MessageKind::NewSolution,
            Payload::Terminate => MessageKind::Terminate,
        }
    }
}

/// A point-to-point message. For `FB_ESTIMATE` the stamp is the echo of the
/// request's stamp.
#[derive(Clone, Debug)]
pub struct Message {
    pub sender: AgentId,
    pub stamp: Timestamp,
    pub payload: Payload,
    pub nc_steps_at_send: u64,
    pub ncccs_at_send: u64,
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        self.payload.kind()
    }
}
