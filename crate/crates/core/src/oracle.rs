//! Exhaustive reference solver for desk-scale instances.

use crate::assignment::PartialAssignment;
use crate::error::{Error, Result};
use crate::model::{AgentId, Cost, Problem, Value};

/// Default cap on the number of leaves of the enumeration tree.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub optimal_cost: Cost,
    /// One value per agent. Lexicographically smallest optimum by value index.
    pub witness: Vec<Value>,
}

pub fn solve_exact(problem: &Problem) -> Result<OracleResult> {
    solve_exact_with_budget(problem, DEFAULT_BUDGET)
}

pub fn solve_exact_with_budget(problem: &Problem, budget: u128) -> Result<OracleResult> {
    let search = Search::new(problem, &PartialAssignment::new(), budget)?;
    let (optimal_cost, witness) = search.run();
    Ok(OracleResult {
        optimal_cost,
        witness,
    })
}

/// Minimum cost over all full assignments that extend `pa`.
pub fn min_completion(problem: &Problem, pa: &PartialAssignment) -> Result<Cost> {
    min_completion_with_budget(problem, pa, DEFAULT_BUDGET)
}

pub fn min_completion_with_budget(
    problem: &Problem,
    pa: &PartialAssignment,
    budget: u128,
) -> Result<Cost> {
    Ok(Search::new(problem, pa, budget)?.run().0)
}

struct Search<'a> {
    problem: &'a Problem,
    values: Vec<Option<Value>>,
    assigned: Vec<AgentId>,
    free: Vec<AgentId>,
    best: Cost,
    best_values: Vec<Value>,
}

impl<'a> Search<'a> {
    fn new(problem: &'a Problem, pa: &PartialAssignment, budget: u128) -> Result<Self> {
        let mut values = vec![None; problem.agent_count()];
        for &(a, v) in pa.bindings() {
            problem.check_value(a, v)?;
            values[a] = Some(v);
        }
        let free: Vec<AgentId> = (0..problem.agent_count())
            .filter(|&a| values[a].is_none())
            .collect();
        let leaves = free
            .iter()
            .try_fold(1u128, |acc, &a| {
                acc.checked_mul(problem.domain_size(a) as u128)
            })
            .unwrap_or(u128::MAX);
        if leaves > budget {
            return Err(Error::BudgetExceeded { leaves, budget });
        }
        Ok(Self {
            problem,
            assigned: pa.bindings().iter().map(|&(a, _)| a).collect(),
            values,
            free,
            best: Cost::MAX,
            best_values: Vec::new(),
        })
    }

    fn run(mut self) -> (Cost, Vec<Value>) {
        let base = self.problem.pa_cost_from(&self.values);
        self.descend(0, base);
        (self.best, self.best_values)
    }

    fn descend(&mut self, depth: usize, cost: Cost) {
        if cost >= self.best {
            return;
        }
        if depth == self.free.len() {
            self.best = cost;
            self.best_values = self.values.iter().map(|v| v.expect("full")).collect();
            return;
        }
        let agent = self.free[depth];
        for v in 0..self.problem.domain_size(agent) {
            let delta: Cost = self
                .assigned
                .iter()
                .map(|&b| {
                    self.problem
                        .cost(agent, v, b, self.values[b].expect("assigned"))
                })
                .sum();
            self.values[agent] = Some(v);
            self.assigned.push(agent);
            self.descend(depth + 1, cost + delta);
            self.assigned.pop();
        }
        self.values[agent] = None;
    }
}

impl Problem {
    fn pa_cost_from(&self, values: &[Option<Value>]) -> Cost {
        self.constraints()
            .filter_map(|(i, j, t)| Some(t.get(values[i]?, values[j]?)))
            .sum()
    }
}
