use std::fmt;

use crate::error::{Error, Result};
use crate::model::{AgentId, Cost, Problem, Value};

/// Ordered `(agent, value)` bindings, agents strictly increasing, with the
/// running cost of every prefix maintained incrementally.
///
/// `prefix_costs[m]` is the cost of the first `m` bindings, so the last
/// entry is the cost of the whole assignment. For a travelling CPA the
/// bindings are agents `0..k` and the prefix costs are exactly the
/// past-cost vector used for backjumping.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartialAssignment {
    bindings: Vec<(AgentId, Value)>,
    prefix_costs: Vec<Cost>,
}

impl Default for PartialAssignment {
    fn default() -> Self {
        Self::new()
    }
}

impl PartialAssignment {
    pub fn new() -> Self {
        Self {
            bindings: Vec::new(),
            prefix_costs: vec![0],
        }
    }

    /// Builds an assignment binding agents `0..values.len()` in order.
    pub fn from_values(problem: &Problem, values: &[Value]) -> Result<Self> {
        let mut pa = Self::new();
        for (agent, &v) in values.iter().enumerate() {
            pa = pa.extend(problem, agent, v)?;
        }
        Ok(pa)
    }

    pub fn bindings(&self) -> &[(AgentId, Value)] {
        &self.bindings
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn cost(&self) -> Cost {
        *self.prefix_costs.last().expect("prefix costs never empty")
    }

    pub fn is_full(&self, problem: &Problem) -> bool {
        self.bindings.len() == problem.agent_count()
    }

    pub fn contains(&self, agent: AgentId) -> bool {
        self.position(agent).is_ok()
    }

    pub fn value_of(&self, agent: AgentId) -> Option<Value> {
        self.position(agent).ok().map(|p| self.bindings[p].1)
    }

    /// Values in agent order; only meaningful for full assignments.
    pub fn values(&self) -> Vec<Value> {
        self.bindings.iter().map(|&(_, v)| v).collect()
    }

    /// Cost of the bindings of agents `< k` (the past cost `PC[k]` of a CPA).
    pub fn cost_below(&self, k: AgentId) -> Cost {
        let m = self.bindings.partition_point(|&(a, _)| a < k);
        self.prefix_costs[m]
    }

    fn position(&self, agent: AgentId) -> std::result::Result<usize, usize> {
        self.bindings.binary_search_by_key(&agent, |&(a, _)| a)
    }

    /// Returns a copy with `agent = value` added; the cost delta is computed
    /// from `problem` against every existing binding.
    pub fn extend(&self, problem: &Problem, agent: AgentId, value: Value) -> Result<Self> {
        problem.check_value(agent, value)?;
        let pos = match self.position(agent) {
            Ok(_) => return Err(Error::AlreadyBound(agent)),
            Err(pos) => pos,
        };
        let mut bindings = self.bindings.clone();
        bindings.insert(pos, (agent, value));
        let mut prefix_costs = self.prefix_costs[..=pos].to_vec();
        for m in pos..bindings.len() {
            let (a, v) = bindings[m];
            let delta: Cost = bindings[..m]
                .iter()
                .map(|&(b, u)| problem.cost(a, v, b, u))
                .sum();
            prefix_costs.push(prefix_costs[m] + delta);
        }
        Ok(Self {
            bindings,
            prefix_costs,
        })
    }

    /// Removes `agent` and every binding of a lower-priority agent.
    pub fn retract(&self, agent: AgentId) -> Result<Self> {
        let pos = self.position(agent).map_err(|_| Error::NotBound(agent))?;
        let mut out = self.clone();
        out.truncate_at(pos);
        Ok(out)
    }

    /// Keeps only the bindings of agents `< k`.
    pub fn keep_below(&mut self, k: AgentId) {
        let m = self.bindings.partition_point(|&(a, _)| a < k);
        self.truncate_at(m);
    }

    fn truncate_at(&mut self, m: usize) {
        self.bindings.truncate(m);
        self.prefix_costs.truncate(m + 1);
    }

    /// Appends a binding for an agent after every bound agent, with the
    /// caller-supplied cost delta. Agents compute the delta through their
    /// metered cost reads, so no table is touched here.
    pub(crate) fn push(&mut self, agent: AgentId, value: Value, delta: Cost) {
        debug_assert!(self.bindings.last().is_none_or(|&(a, _)| a < agent));
        let cost = self.cost() + delta;
        self.bindings.push((agent, value));
        self.prefix_costs.push(cost);
    }
}

impl fmt::Display for PartialAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (a, v)) in self.bindings.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "X{}={}", a + 1, v)?;
        }
        write!(f, "}} cost {}", self.cost())
    }
}
