//! Event trace, one event per line:
//!
//! ```text
//! recv <agent> <kind> <stamp>
//! send <from>-><to> <kind>
//! ```
//!
//! Agents are 1-based; stamps are comma-separated counters (`-` for none).

use std::fmt;

use super::message::MessageKind;
use crate::error::{Error, Result};
use crate::model::{AgentId, Cost};
use crate::timestamp::Timestamp;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    Recv {
        agent: AgentId,
        kind: MessageKind,
        stamp: Timestamp,
    },
    Send {
        from: AgentId,
        to: AgentId,
        kind: MessageKind,
        stamp: Timestamp,
        /// Assignment cost for `CPA_MSG` and `NEW_SOLUTION`; not rendered.
        cost: Option<Cost>,
    },
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Recv { agent, kind, stamp } => {
                write!(f, "recv {} {} {}", agent + 1, kind, stamp)
            }
            TraceEvent::Send { from, to, kind, .. } => {
                write!(f, "send {}->{} {}", from + 1, to + 1, kind)
            }
        }
    }
}

impl TraceEvent {
    /// Parses one rendered line. Send stamps and costs are not part of the
    /// text format and come back empty.
    pub fn parse(line: &str) -> Result<Self> {
        let bad = |message: String| Error::Parse { line: 0, message };
        let toks: Vec<&str> = line.split_whitespace().collect();
        let agent = |s: &str| -> Result<AgentId> {
            match s.parse::<usize>() {
                Ok(a) if a >= 1 => Ok(a - 1),
                _ => Err(bad(format!("bad agent number {s:?}"))),
            }
        };
        match toks.as_slice() {
            ["recv", a, kind, stamp] => Ok(TraceEvent::Recv {
                agent: agent(a)?,
                kind: kind.parse().map_err(bad)?,
                stamp: stamp.parse().map_err(|e| bad(format!("bad stamp: {e}")))?,
            }),
            ["send", route, kind] => {
                let (from, to) = route
                    .split_once("->")
                    .ok_or_else(|| bad(format!("bad route {route:?}")))?;
                Ok(TraceEvent::Send {
                    from: agent(from)?,
                    to: agent(to)?,
                    kind: kind.parse().map_err(bad)?,
                    stamp: Timestamp::default(),
                    cost: None,
                })
            }
            _ => Err(bad(format!("unrecognized trace line {line:?}"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn parse(text: &str) -> Result<Self> {
        let events = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(no, l)| {
                TraceEvent::parse(l).map_err(|e| match e {
                    Error::Parse { message, .. } => Error::Parse {
                        line: no + 1,
                        message,
                    },
                    other => other,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { events })
    }

    /// Costs of every `NEW_SOLUTION` broadcast, in order. Each broadcast
    /// shows up as `n - 1` sends; one per broadcast is kept by following
    /// the copies addressed to the lowest-numbered recipient.
    pub fn solution_costs(&self) -> Vec<Cost> {
        let mut out = Vec::new();
        let mut last_to: Option<AgentId> = None;
        for e in &self.events {
            if let TraceEvent::Send {
                kind: MessageKind::NewSolution,
                to,
                cost: Some(c),
                ..
            } = e
            {
                if last_to.is_none_or(|prev| *to <= prev) {
                    out.push(*c);
                }
                last_to = Some(*to);
            }
        }
        out
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines_render_and_parse() {
        let recv = TraceEvent::Recv {
            agent: 2,
            kind: MessageKind::FbCpa,
            stamp: "1,2,0,0".parse().unwrap(),
        };
        assert_eq!(recv.to_string(), "recv 3 FB_CPA 1,2,0,0");
        assert_eq!(TraceEvent::parse("recv 3 FB_CPA 1,2,0,0").unwrap(), recv);
        let send = TraceEvent::Send {
            from: 0,
            to: 3,
            kind: MessageKind::Terminate,
            stamp: Timestamp::default(),
            cost: None,
        };
        assert_eq!(send.to_string(), "send 1->4 TERMINATE");
        assert_eq!(TraceEvent::parse("send 1->4 TERMINATE").unwrap(), send);
    }

    #[test]
    fn bad_lines_rejected() {
        assert!(TraceEvent::parse("recv 0 CPA_MSG 1").is_err());
        assert!(TraceEvent::parse("send 1-2 CPA_MSG").is_err());
        assert!(TraceEvent::parse("send 1->2 PING").is_err());
        assert!(matches!(
            Trace::parse("recv 1 CPA_MSG 1\nbogus\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
