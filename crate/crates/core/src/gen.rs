//! Random Max-DisCSP instances and the hand-built four-agent fixture.
//!
//! The generator draws from a single ChaCha8 stream seeded with
//! `GenParams::seed`, in a fixed order:
//!
//! 1. unordered pairs `(i, j)`, `i < j`, in lexicographic order;
//! 2. per pair, one Bernoulli(`p1`) draw deciding whether the constraint exists;
//! 3. for an included pair, its `d x d` entries in row-major order, each one
//!    Bernoulli(`p2`) draw for "violated", followed (only when `max_cost > 1`
//!    and the entry is violated) by one uniform draw in `1..=max_cost`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Cost, CostTable, Problem, Value};

/// Symbolic value `R` of the fixture.
pub const R: Value = 0;
/// Symbolic value `B` of the fixture.
pub const B: Value = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub n: usize,
    pub d: usize,
    /// Constraint density.
    pub p1: f64,
    /// Constraint tightness.
    pub p2: f64,
    pub seed: u64,
    /// Cost of a violated entry is uniform in `1..=max_cost`; 1 gives Max-CSP.
    pub max_cost: Cost,
}

impl GenParams {
    pub fn new(n: usize, d: usize, p1: f64, p2: f64, seed: u64) -> Self {
        Self {
            n,
            d,
            p1,
            p2,
            seed,
            max_cost: 1,
        }
    }

    pub fn with_max_cost(mut self, max_cost: Cost) -> Self {
        self.max_cost = max_cost;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.d == 0 {
            return bad("d must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.p1) {
            return bad(format!("p1 = {} is outside [0, 1]", self.p1));
        }
        if !(0.0..=1.0).contains(&self.p2) {
            return bad(format!("p2 = {} is outside [0, 1]", self.p2));
        }
        if self.max_cost == 0 {
            return bad("max_cost must be at least 1".into());
        }
        Ok(())
    }
}

pub fn generate(params: &GenParams) -> Result<Problem> {
    params.validate()?;
    let GenParams { n, d, p1, p2, .. } = *params;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut problem = Problem::new(vec![d; n])?;
    for i in 0..n {
        for j in i + 1..n {
            if !rng.random_bool(p1) {
                continue;
            }
            let entries = (0..d * d)
                .map(|_| {
                    if !rng.random_bool(p2) {
                        0
                    } else if params.max_cost == 1 {
                        1
                    } else {
                        rng.random_range(1..=params.max_cost)
                    }
                })
                .collect();
            problem.add_constraint(i, j, CostTable::new(d, d, entries)?)?;
        }
    }
    Ok(problem)
}

/// Four agents with domain `{R, B}` and constraints on
/// `(X1,X2), (X1,X3), (X2,X3), (X2,X4)`, all sharing the table
///
/// ```text
///       R  B
///   R   2  1
///   B   1  3
/// ```
///
/// Every entry is pinned by the worked costs of the example run: RRRR = 8,
/// RRRB = 7, RRB· = 4, RRBR = 6, RRBB = 5 and the estimates 3 (X3) and 1 (X4)
/// against `{X1=R, X2=B}`.
pub fn fixture_four_agents() -> Problem {
    let table = CostTable::from_rows(&[vec![2, 1], vec![1, 3]]).expect("static table");
    let mut p = Problem::new(vec![2; 4]).expect("static domains");
    for (i, j) in [(0, 1), (0, 2), (1, 2), (1, 3)] {
        p.add_constraint(i, j, table.clone())
            .expect("static constraint");
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::PartialAssignment;

    fn cost_of(values: &[Value]) -> Cost {
        let p = fixture_four_agents();
        p.pa_cost(&PartialAssignment::from_values(&p, values).unwrap())
    }

    #[test]
    fn fixture_matches_worked_costs() {
        assert_eq!(cost_of(&[R]), 0);
        assert_eq!(cost_of(&[R, R]), 2);
        assert_eq!(cost_of(&[R, R, B]), 4);
        assert_eq!(cost_of(&[R, R, R, R]), 8);
        assert_eq!(cost_of(&[R, R, R, B]), 7);
        assert_eq!(cost_of(&[R, R, B, R]), 6);
        assert_eq!(cost_of(&[R, R, B, B]), 5);
        assert_eq!(cost_of(&[R, B, R, R]), 5);
        let p = fixture_four_agents();
        let x1r_x4r = PartialAssignment::new()
            .extend(&p, 0, R)
            .unwrap()
            .extend(&p, 3, R)
            .unwrap();
        assert_eq!(p.pa_cost(&x1r_x4r), 0);
    }

    #[test]
    fn fixture_pair_costs() {
        let p = fixture_four_agents();
        assert_eq!(p.pair_cost(0, R, 1, R), Ok(2));
        assert_eq!(p.pair_cost(0, R, 3, R), Ok(0));
    }

    #[test]
    fn full_density_gives_complete_graph() {
        let p = generate(&GenParams::new(5, 3, 1.0, 0.5, 7)).unwrap();
        assert_eq!(p.constraint_count(), 10);
    }

    #[test]
    fn zero_tightness_gives_zero_tables() {
        let p = generate(&GenParams::new(6, 4, 0.8, 0.0, 3)).unwrap();
        assert!(p.constraints().all(|(_, _, t)| t.max_entry() == 0));
    }

    #[test]
    fn deterministic_for_seed() {
        let params = GenParams::new(8, 5, 0.7, 0.9, 42);
        assert_eq!(generate(&params).unwrap(), generate(&params).unwrap());
        let other = GenParams { seed: 43, ..params };
        assert_ne!(generate(&params).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn max_cs_entries_are_binary_and_weighted_entries_in_range() {
        let p = generate(&GenParams::new(7, 3, 0.7, 0.6, 5)).unwrap();
        assert!(p
            .constraints()
            .all(|(_, _, t)| t.entries().iter().all(|&c| c <= 1)));
        let w = generate(&GenParams::new(7, 3, 0.7, 0.6, 5).with_max_cost(9)).unwrap();
        assert!(w
            .constraints()
            .all(|(_, _, t)| t.entries().iter().all(|&c| c <= 9)));
        assert!(w.constraints().any(|(_, _, t)| t.max_entry() > 1));
    }

    #[test]
    fn tightness_fraction_by_direct_count() {
        let (mut ones, mut total) = (0u64, 0u64);
        for seed in 0..1000 {
            let p = generate(&GenParams::new(10, 10, 0.7, 0.5, seed)).unwrap();
            for (_, _, t) in p.constraints() {
                ones += t.entries().iter().filter(|&&c| c == 1).count() as u64;
                total += t.entries().len() as u64;
            }
        }
        let frac = ones as f64 / total as f64;
        assert!((frac - 0.5).abs() <= 0.02, "fraction {frac}");
    }

    #[test]
    fn rejects_bad_params() {
        assert!(generate(&GenParams::new(0, 3, 0.5, 0.5, 0)).is_err());
        assert!(generate(&GenParams::new(3, 0, 0.5, 0.5, 0)).is_err());
        assert!(generate(&GenParams::new(3, 3, 1.5, 0.5, 0)).is_err());
        assert!(generate(&GenParams::new(3, 3, 0.5, -0.1, 0)).is_err());
    }
}
