//! Lower bounds shared by the forward-bounding agents.
//!
//! Prefix-indexed vectors use prefix lengths: element `k` refers to the
//! bindings of agents `0..k`, so a vector for an `n`-agent problem has `n + 1`
//! elements.

use crate::assignment::PartialAssignment;
use crate::kernel::Context;
use crate::model::{AgentId, Cost, Problem, Value};

/// Source of constraint costs. Agents read through their [`Context`] so every
/// read is metered; tests read a [`Problem`] directly. Unconstrained pairs
/// cost zero.
pub trait CostReader {
    fn agent_count(&self) -> usize;
    fn domain_size(&self, agent: AgentId) -> usize;
    fn is_constrained(&self, i: AgentId, j: AgentId) -> bool;
    fn cost(&mut self, i: AgentId, v: Value, j: AgentId, u: Value) -> Cost;
}

impl CostReader for &Problem {
    fn agent_count(&self) -> usize {
        Problem::agent_count(self)
    }

    fn domain_size(&self, agent: AgentId) -> usize {
        Problem::domain_size(self, agent)
    }

    fn is_constrained(&self, i: AgentId, j: AgentId) -> bool {
        Problem::is_constrained(self, i, j)
    }

    fn cost(&mut self, i: AgentId, v: Value, j: AgentId, u: Value) -> Cost {
        Problem::cost(self, i, v, j, u)
    }
}

impl CostReader for Context<'_> {
    fn agent_count(&self) -> usize {
        Context::agent_count(self)
    }

    fn domain_size(&self, agent: AgentId) -> usize {
        Context::domain_size(self, agent)
    }

    fn is_constrained(&self, i: AgentId, j: AgentId) -> bool {
        Context::is_constrained(self, i, j)
    }

    fn cost(&mut self, i: AgentId, v: Value, j: AgentId, u: Value) -> Cost {
        Context::cost(self, i, v, j, u)
    }
}

/// `h(v)` for every value of agent `i`: the sum over lower-priority agents `j`
/// of the cheapest pairing of `v` with a value of `j`.
pub fn precompute_h(r: &mut impl CostReader, i: AgentId) -> Vec<Cost> {
    let n = r.agent_count();
    let mut h = vec![0; r.domain_size(i)];
    for j in i + 1..n {
        if !r.is_constrained(i, j) {
            continue;
        }
        for (v, hv) in h.iter_mut().enumerate() {
            *hv += (0..r.domain_size(j))
                .map(|u| r.cost(i, v, j, u))
                .min()
                .unwrap_or(0);
        }
    }
    h
}

/// Cost of `i = v` against every binding of `pa`.
pub fn local_cost(r: &mut impl CostReader, i: AgentId, v: Value, pa: &PartialAssignment) -> Cost {
    pa.bindings().iter().map(|&(m, u)| r.cost(i, v, m, u)).sum()
}

/// Local cost restricted to each prefix: element `k` sums the pairings of
/// `i = v` with bindings of agents `< k`.
pub fn local_cost_prefix(
    r: &mut impl CostReader,
    i: AgentId,
    v: Value,
    pa: &PartialAssignment,
) -> Vec<Cost> {
    let n = r.agent_count();
    let mut out = vec![0; n + 1];
    let mut acc = 0;
    let mut bindings = pa.bindings().iter().peekable();
    for (k, slot) in out.iter_mut().enumerate() {
        while let Some(&&(m, u)) = bindings.peek() {
            if m >= k {
                break;
            }
            acc += r.cost(i, v, m, u);
            bindings.next();
        }
        *slot = acc;
    }
    out
}

/// `f(v) = LC(v) + h(v)`.
pub fn f_value(
    r: &mut impl CostReader,
    i: AgentId,
    v: Value,
    pa: &PartialAssignment,
    h: &[Cost],
) -> Cost {
    local_cost(r, i, v, pa) + h[v]
}

/// Scalar forward-bounding estimate of responder `j`: `min_w f(w)` against `pa`.
pub fn scalar_estimate(
    r: &mut impl CostReader,
    j: AgentId,
    pa: &PartialAssignment,
    h: &[Cost],
) -> Cost {
    (0..r.domain_size(j))
        .map(|w| f_value(r, j, w, pa, h))
        .min()
        .unwrap_or(0)
}

/// Prefix-indexed estimate of responder `j`: element `k` is
/// `min_w (LC(w)[k] + h(w))`.
pub fn estimate_vector(
    r: &mut impl CostReader,
    j: AgentId,
    pa: &PartialAssignment,
    h: &[Cost],
) -> Vec<Cost> {
    let n = r.agent_count();
    let mut out = vec![Cost::MAX; n + 1];
    for (w, &hw) in h.iter().enumerate().take(r.domain_size(j)) {
        let lc = local_cost_prefix(r, j, w, pa);
        for (slot, c) in out.iter_mut().zip(lc) {
            *slot = (*slot).min(c + hw);
        }
    }
    out
}

/// Bound bookkeeping of a backjumping agent for one higher-priority context.
///
/// `PC` comes from the held CPA, `LC(v)` is computed per value when the
/// context is adopted, and `FC_j(v)` is stored as estimate vectors arrive.
#[derive(Clone, Debug)]
pub struct BoundVectors {
    n: usize,
    pc: Vec<Cost>,
    lc: Vec<Vec<Cost>>,
    fc: Vec<Vec<Option<Vec<Cost>>>>,
}

impl BoundVectors {
    pub fn new(n: usize, domain_size: usize) -> Self {
        Self {
            n,
            pc: vec![0; n + 1],
            lc: vec![vec![0; n + 1]; domain_size],
            fc: vec![vec![None; n]; domain_size],
        }
    }

    pub fn set_pc(&mut self, pc: Vec<Cost>) {
        assert_eq!(pc.len(), self.n + 1);
        self.pc = pc;
    }

    /// `PC` of a CPA holding agents `0..k` (other entries repeat the total).
    pub fn set_pc_from(&mut self, cpa: &PartialAssignment) {
        self.pc = (0..=self.n).map(|k| cpa.cost_below(k)).collect();
    }

    pub fn set_lc(&mut self, v: Value, lc: Vec<Cost>) {
        assert_eq!(lc.len(), self.n + 1);
        self.lc[v] = lc;
    }

    pub fn set_fc(&mut self, v: Value, responder: AgentId, fc: Vec<Cost>) {
        assert_eq!(fc.len(), self.n + 1);
        self.fc[v][responder] = Some(fc);
    }

    pub fn clear_fc(&mut self) {
        for row in &mut self.fc {
            row.iter_mut().for_each(|e| *e = None);
        }
    }

    pub fn pc(&self, k: usize) -> Cost {
        self.pc[k]
    }

    pub fn lc(&self, v: Value, k: usize) -> Cost {
        self.lc[v][k]
    }

    pub fn fc_sum(&self, v: Value, k: usize) -> Cost {
        self.fc[v].iter().flatten().map(|vec| vec[k]).sum()
    }

    /// `FALB(v)[k] = LC(v)[k] + PC[k] + Σ_j FC_j(v)[k]`, absent `FC` as zero.
    pub fn falb(&self, v: Value, k: usize) -> Cost {
        self.lc[v][k] + self.pc[k] + self.fc_sum(v, k)
    }

    pub fn falb_min(&self, k: usize) -> Cost {
        (0..self.lc.len())
            .map(|v| self.falb(v, k))
            .min()
            .unwrap_or(0)
    }

    /// Whether some value of the holder keeps agent `t` worth revisiting:
    /// `FALB(v)[t] + PC[t+1] - PC[t] < b`.
    pub fn worth_revisiting(&self, t: AgentId, b: Cost) -> bool {
        let delta = self.pc[t + 1] - self.pc[t];
        (0..self.lc.len()).any(|v| self.falb(v, t) + delta < b)
    }

    /// Backjump target of `holder` under upper bound `b`: scanning from
    /// `holder - 1` down to `0`, the first agent worth revisiting. `None`
    /// means the search can end.
    pub fn backtrack_target(&self, holder: AgentId, b: Cost) -> Option<AgentId> {
        (0..holder).rev().find(|&t| self.worth_revisiting(t, b))
    }
}
