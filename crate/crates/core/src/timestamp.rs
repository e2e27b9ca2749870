//! Assignment-counter vectors and the relevance rules built on them.
//!
//! Element `k` of a [`Timestamp`] is agent `k`'s assignment counter at the
//! time the carried assignment was made. Newer assignments compare greater
//! lexicographically on every prefix that covers the agent that changed.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::model::AgentId;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Timestamp(Vec<u32>);

impl Timestamp {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn from_counters(counters: Vec<u32>) -> Self {
        Self(counters)
    }

    /// Stamp consisting of `prefix`, then `own`, then zeros up to length `n`.
    pub fn extended(prefix: &[u32], own: u32, n: usize) -> Self {
        let mut v = Vec::with_capacity(n);
        v.extend_from_slice(prefix);
        v.push(own);
        v.resize(n, 0);
        Self(v)
    }

    pub fn counters(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn prefix(&self, len: usize) -> &[u32] {
        &self.0[..len.min(self.0.len())]
    }

    /// Lexicographic comparison of the first `len` elements.
    pub fn cmp_prefix(&self, other: &Timestamp, len: usize) -> Ordering {
        self.prefix(len).cmp(other.prefix(len))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "-");
        }
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Timestamp {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "-" {
            return Ok(Self::default());
        }
        s.split(',')
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map(Self)
    }
}

/// What an agent should do with an incoming CPA from a higher-priority agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arrival {
    /// Built on an abandoned combination of higher-priority assignments.
    Stale,
    /// Higher-priority assignments changed: counter, cursor and estimates reset.
    NewContext,
    /// Same context as the one already adopted.
    Duplicate,
}

/// Per-agent bookkeeping for obsolete-message detection.
///
/// `latest` is the newest higher-priority prefix the agent has heard of (from
/// CPAs or forward-bounding requests); `context` is the prefix its own
/// counter, value cursor and estimates refer to. The two differ only while a
/// newer prefix has been announced by an `FB_CPA` but the matching CPA has not
/// yet arrived, in which case the agent's current assignment is obsolete.
#[derive(Clone, Debug)]
pub struct StampTracker {
    agent: AgentId,
    n: usize,
    latest: Vec<u32>,
    context: Option<Vec<u32>>,
    counter: u32,
    holding: bool,
}

impl StampTracker {
    pub fn new(agent: AgentId, n: usize) -> Self {
        Self {
            agent,
            n,
            latest: vec![0; agent],
            // The first agent has no higher-priority context to wait for.
            context: (agent == 0).then(Vec::new),
            counter: 0,
            holding: false,
        }
    }

    pub fn counter(&self) -> u32 {
        self.counter
    }

    /// Whether the agent currently has a live assignment on a CPA.
    pub fn holding(&self) -> bool {
        self.holding
    }

    fn is_current(&self) -> bool {
        self.context.as_deref() == Some(&self.latest[..])
    }

    /// Relevance of a `CPA_MSG` sent by a higher-priority agent.
    pub fn arrive_from_above(&mut self, stamp: &Timestamp) -> Arrival {
        let incoming = stamp.prefix(self.agent);
        match incoming.cmp(&self.latest[..]) {
            Ordering::Less => return Arrival::Stale,
            Ordering::Greater => self.latest.copy_from_slice(incoming),
            Ordering::Equal => {}
        }
        if self.context.as_deref() == Some(incoming) {
            return Arrival::Duplicate;
        }
        self.context = Some(incoming.to_vec());
        self.counter = 0;
        self.holding = false;
        Arrival::NewContext
    }

    /// Relevance of a `CPA_MSG` backtracked to this agent by a lower-priority
    /// one: it must carry exactly the agent's live assignment.
    pub fn accepts_from_below(&self, stamp: &Timestamp) -> bool {
        self.holding
            && self.is_current()
            && stamp.prefix(self.agent) == &self.latest[..]
            && stamp.counters().get(self.agent) == Some(&self.counter)
    }

    /// Relevance of an `FB_CPA` sent by `sender`: its stamp prefix of length
    /// `sender + 1` must not be older than what this agent knows.
    pub fn observe_request(&mut self, sender: AgentId, stamp: &Timestamp) -> bool {
        let len = (sender + 1).min(self.agent);
        let incoming = stamp.prefix(len);
        match incoming.cmp(&self.latest[..len]) {
            Ordering::Less => false,
            Ordering::Equal => true,
            Ordering::Greater => {
                self.latest[..len].copy_from_slice(incoming);
                self.latest[len..].iter_mut().for_each(|c| *c = 0);
                true
            }
        }
    }

    /// Relevance of an `FB_ESTIMATE`: the echoed stamp must match the live
    /// assignment exactly on its first `agent + 1` elements.
    pub fn accepts_estimate(&self, echoed: &Timestamp) -> bool {
        self.accepts_from_below(echoed)
    }

    /// Records a new own assignment and returns the stamp it travels with.
    pub fn assign(&mut self) -> Timestamp {
        self.counter += 1;
        self.holding = true;
        self.current()
    }

    /// The own assignment has been withdrawn (backtrack or reassignment).
    pub fn release(&mut self) {
        self.holding = false;
    }

    /// Stamp of the current context with the agent's counter appended.
    pub fn current(&self) -> Timestamp {
        let context = self.context.as_deref().unwrap_or(&self.latest);
        Timestamp::extended(context, self.counter, self.n)
    }

    /// Stamp for a CPA sent back to `target`: the context prefix up to and
    /// including `target`'s counter, zeros after.
    pub fn for_target(&self, target: AgentId) -> Timestamp {
        debug_assert!(target < self.agent);
        let context = self.context.as_deref().unwrap_or(&self.latest);
        let mut v = context[..=target].to_vec();
        v.resize(self.n, 0);
        Timestamp::from_counters(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[u32]) -> Timestamp {
        Timestamp::from_counters(v.to_vec())
    }

    #[test]
    fn equal_prefix_is_processed() {
        let mut t = StampTracker::new(2, 4);
        assert_eq!(t.arrive_from_above(&ts(&[1, 1, 0, 0])), Arrival::NewContext);
        assert_eq!(t.arrive_from_above(&ts(&[1, 1, 0, 0])), Arrival::Duplicate);
    }

    #[test]
    fn smaller_prefix_is_discarded() {
        let mut t = StampTracker::new(2, 4);
        t.arrive_from_above(&ts(&[1, 2, 0, 0]));
        assert_eq!(t.arrive_from_above(&ts(&[1, 1, 5, 0])), Arrival::Stale);
    }

    #[test]
    fn greater_prefix_is_adopted() {
        let mut t = StampTracker::new(2, 4);
        t.arrive_from_above(&ts(&[1, 9, 0, 0]));
        t.assign();
        t.assign();
        assert_eq!(t.arrive_from_above(&ts(&[2, 0, 0, 0])), Arrival::NewContext);
        assert_eq!(t.counter(), 0);
        assert!(!t.holding());
        assert_eq!(t.assign(), ts(&[2, 0, 1, 0]));
    }

    #[test]
    fn backtrack_must_match_live_assignment() {
        let mut t = StampTracker::new(1, 3);
        t.arrive_from_above(&ts(&[1, 0, 0]));
        let first = t.assign();
        assert!(t.accepts_from_below(&first));
        let second = t.assign();
        assert!(!t.accepts_from_below(&first));
        assert!(t.accepts_from_below(&second));
        t.release();
        assert!(!t.accepts_from_below(&second));
    }

    #[test]
    fn request_announces_newer_context() {
        let mut t = StampTracker::new(2, 4);
        t.arrive_from_above(&ts(&[1, 1, 0, 0]));
        let live = t.assign();
        assert!(t.accepts_estimate(&live));
        assert!(!t.observe_request(0, &ts(&[0, 0, 0, 0])));
        assert!(t.observe_request(0, &ts(&[2, 0, 0, 0])));
        // The live assignment is now known to be obsolete.
        assert!(!t.accepts_estimate(&live));
        assert!(!t.accepts_from_below(&live));
        assert_eq!(t.arrive_from_above(&ts(&[1, 1, 0, 0])), Arrival::Stale);
        assert_eq!(t.arrive_from_above(&ts(&[2, 1, 0, 0])), Arrival::NewContext);
    }

    #[test]
    fn request_from_parent_then_cpa_is_new_context() {
        let mut t = StampTracker::new(2, 4);
        t.arrive_from_above(&ts(&[1, 1, 0, 0]));
        assert!(t.observe_request(1, &ts(&[1, 2, 0, 0])));
        assert_eq!(t.arrive_from_above(&ts(&[1, 2, 0, 0])), Arrival::NewContext);
    }

    #[test]
    fn first_agent_has_empty_context() {
        let mut t = StampTracker::new(0, 3);
        assert_eq!(t.assign(), ts(&[1, 0, 0]));
        assert!(t.accepts_from_below(&ts(&[1, 0, 0])));
        assert!(!t.accepts_from_below(&ts(&[0, 0, 0])));
    }

    #[test]
    fn target_stamp_keeps_prefix() {
        let mut t = StampTracker::new(3, 5);
        t.arrive_from_above(&ts(&[2, 1, 3, 0, 0]));
        assert_eq!(t.for_target(1), ts(&[2, 1, 0, 0, 0]));
    }

    #[test]
    fn display_round_trip() {
        let s = ts(&[1, 0, 12]);
        assert_eq!(s.to_string(), "1,0,12");
        assert_eq!("1,0,12".parse::<Timestamp>().unwrap(), s);
        assert_eq!(Timestamp::default().to_string(), "-");
        assert_eq!("-".parse::<Timestamp>().unwrap(), Timestamp::default());
    }

    #[test]
    fn prefix_comparison_is_lexicographic() {
        assert_eq!(ts(&[2, 0]).cmp_prefix(&ts(&[1, 9]), 2), Ordering::Greater);
        assert_eq!(
            ts(&[1, 2, 7]).cmp_prefix(&ts(&[1, 2, 0]), 2),
            Ordering::Equal
        );
    }
}
