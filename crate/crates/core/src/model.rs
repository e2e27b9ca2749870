//! Binary DisCOP instances.
//!
//! Agents and values are 0-based internally; the text format and the trace
//! output use 1-based agent numbers.

use std::collections::BTreeMap;

use crate::assignment::PartialAssignment;
use crate::error::{Error, Result};

/// 0-based agent index. Agent `i` owns variable `i`; lower index = higher priority.
pub type AgentId = usize;
/// 0-based index into an agent's domain.
pub type Value = usize;
/// Non-negative integer cost.
pub type Cost = u64;

const NO_TABLE: u32 = u32::MAX;

/// Dense `rows x cols` table, read as `table[v][u]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostTable {
    rows: usize,
    cols: usize,
    entries: Vec<Cost>,
}

impl CostTable {
    pub fn new(rows: usize, cols: usize, entries: Vec<Cost>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidParams(format!(
                "cost table of {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn filled(rows: usize, cols: usize, cost: Cost) -> Self {
        Self {
            rows,
            cols,
            entries: vec![cost; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<Cost>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidParams("ragged cost table".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            entries: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, v: Value, u: Value) -> Cost {
        self.entries[v * self.cols + u]
    }

    pub fn row(&self, v: Value) -> &[Cost] {
        &self.entries[v * self.cols..(v + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Cost] {
        &self.entries
    }

    pub fn max_entry(&self) -> Cost {
        self.entries.iter().copied().max().unwrap_or(0)
    }

    pub fn transposed(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for u in 0..self.cols {
            for v in 0..self.rows {
                entries.push(self.get(v, u));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }
}

/// A binary DisCOP: one variable per agent, a domain size per agent, and
/// at most one cost table per unordered agent pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    domains: Vec<usize>,
    constraints: BTreeMap<(AgentId, AgentId), CostTable>,
    // n*n slot -> index into `tables`, kept in sync with `constraints`.
    lookup: Vec<u32>,
    tables: Vec<CostTable>,
}

impl Problem {
    pub fn new(domains: Vec<usize>) -> Result<Self> {
        if domains.is_empty() {
            return Err(Error::InvalidParams(
                "a problem needs at least one agent".into(),
            ));
        }
        if let Some(agent) = domains.iter().position(|&d| d == 0) {
            return Err(Error::InvalidParams(format!(
                "agent {agent} has an empty domain"
            )));
        }
        let n = domains.len();
        Ok(Self {
            domains,
            constraints: BTreeMap::new(),
            lookup: vec![NO_TABLE; n * n],
            tables: Vec::new(),
        })
    }

    /// Adds the table for `(i, j)` read as `table[v_i][v_j]`. Pairs given as
    /// `i > j` are transposed and stored normalized.
    pub fn add_constraint(&mut self, i: AgentId, j: AgentId, table: CostTable) -> Result<()> {
        self.check_agent(i)?;
        self.check_agent(j)?;
        if i == j {
            return Err(Error::SelfConstraint(i));
        }
        let (lo, hi, table) = if i < j {
            (i, j, table)
        } else {
            (j, i, table.transposed())
        };
        if table.rows != self.domains[lo] || table.cols != self.domains[hi] {
            return Err(Error::TableShape {
                i: lo,
                j: hi,
                rows: table.rows,
                cols: table.cols,
                expected_rows: self.domains[lo],
                expected_cols: self.domains[hi],
            });
        }
        if self.constraints.contains_key(&(lo, hi)) {
            return Err(Error::DuplicateConstraint(lo, hi));
        }
        self.constraints.insert((lo, hi), table);
        self.rebuild_lookup();
        Ok(())
    }

    fn rebuild_lookup(&mut self) {
        let n = self.agent_count();
        self.lookup.iter_mut().for_each(|s| *s = NO_TABLE);
        self.tables.clear();
        for (idx, (&(i, j), table)) in self.constraints.iter().enumerate() {
            self.lookup[i * n + j] = idx as u32;
            self.lookup[j * n + i] = idx as u32;
            self.tables.push(table.clone());
        }
    }

    pub fn agent_count(&self) -> usize {
        self.domains.len()
    }

    pub fn domain_size(&self, agent: AgentId) -> usize {
        self.domains[agent]
    }

    pub fn domains(&self) -> &[usize] {
        &self.domains
    }

    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    /// Constraints in lexicographic `(i, j)` order with `i < j`.
    pub fn constraints(&self) -> impl Iterator<Item = (AgentId, AgentId, &CostTable)> {
        self.constraints.iter().map(|(&(i, j), t)| (i, j, t))
    }

    /// The normalized table for the pair, if any (rows belong to the lower index).
    pub fn constraint(&self, i: AgentId, j: AgentId) -> Option<&CostTable> {
        self.constraints.get(&(i.min(j), i.max(j)))
    }

    #[inline]
    pub fn is_constrained(&self, i: AgentId, j: AgentId) -> bool {
        self.lookup[i * self.agent_count() + j] != NO_TABLE
    }

    /// Cost of `(i = v, j = u)`; zero for unconstrained pairs.
    ///
    /// Unchecked hot-path read: indices are trusted (out-of-range indices
    /// panic via slice indexing). Use [`Problem::pair_cost`] at API
    /// boundaries.
    #[inline]
    pub fn cost(&self, i: AgentId, v: Value, j: AgentId, u: Value) -> Cost {
        let slot = self.lookup[i * self.agent_count() + j];
        if slot == NO_TABLE {
            return 0;
        }
        let table = &self.tables[slot as usize];
        if i < j {
            table.get(v, u)
        } else {
            table.get(u, v)
        }
    }

    /// Checked version of [`Problem::cost`].
    pub fn pair_cost(&self, i: AgentId, v: Value, j: AgentId, u: Value) -> Result<Cost> {
        self.check_value(i, v)?;
        self.check_value(j, u)?;
        if i == j {
            return Err(Error::SelfConstraint(i));
        }
        Ok(self.cost(i, v, j, u))
    }

    /// Full recomputation of a partial assignment's cost: the sum over all
    /// constraints whose two agents are both bound.
    pub fn pa_cost(&self, pa: &PartialAssignment) -> Cost {
        self.pa_cost_counted(pa).0
    }

    /// As [`Problem::pa_cost`], also returning the number of table reads.
    pub fn pa_cost_counted(&self, pa: &PartialAssignment) -> (Cost, u64) {
        let mut values = vec![None; self.agent_count()];
        for &(a, v) in pa.bindings() {
            values[a] = Some(v);
        }
        let mut reads = 0;
        let mut total = 0;
        for (&(i, j), table) in &self.constraints {
            if let (Some(v), Some(u)) = (values[i], values[j]) {
                reads += 1;
                total += table.get(v, u);
            }
        }
        (total, reads)
    }

    /// Cost of a full assignment given as one value per agent.
    pub fn full_cost(&self, values: &[Value]) -> Cost {
        debug_assert_eq!(values.len(), self.agent_count());
        self.constraints
            .iter()
            .map(|(&(i, j), t)| t.get(values[i], values[j]))
            .sum()
    }

    /// A value strictly above any achievable cost; the "infinite" upper bound.
    pub fn cost_ceiling(&self) -> Cost {
        self.constraints
            .values()
            .map(CostTable::max_entry)
            .sum::<Cost>()
            + 1
    }

    pub(crate) fn check_agent(&self, agent: AgentId) -> Result<()> {
        if agent >= self.agent_count() {
            return Err(Error::AgentOutOfRange {
                agent,
                agents: self.agent_count(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_value(&self, agent: AgentId, value: Value) -> Result<()> {
        self.check_agent(agent)?;
        if value >= self.domains[agent] {
            return Err(Error::ValueOutOfRange {
                agent,
                value,
                domain: self.domains[agent],
            });
        }
        Ok(())
    }
}
