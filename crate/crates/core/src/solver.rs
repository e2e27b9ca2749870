use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::afb::{AfbAgent, ValueOrdering};
use crate::afb_bj::AfbBjAgent;
use crate::error::{Error, Result};
use crate::kernel::{run, Agent, RunConfig, RunReport};
use crate::model::Problem;
use crate::sbb::SbbAgent;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    Sbb,
    Afb,
    AfbMinC,
    AfbBj,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Sbb,
        Algorithm::Afb,
        Algorithm::AfbMinC,
        Algorithm::AfbBj,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sbb => "SBB",
            Algorithm::Afb => "AFB",
            Algorithm::AfbMinC => "AFB-minC",
            Algorithm::AfbBj => "AFB-BJ",
        }
    }

    /// One fresh agent per variable of `problem`.
    pub fn agents(self, problem: &Problem) -> Vec<Box<dyn Agent>> {
        let n = problem.agent_count();
        (0..n)
            .map(|i| {
                let d = problem.domain_size(i);
                let agent: Box<dyn Agent> = match self {
                    Algorithm::Sbb => Box::new(SbbAgent::new(i, n, d)),
                    Algorithm::Afb => Box::new(AfbAgent::new(i, n, d, ValueOrdering::Index)),
                    Algorithm::AfbMinC => Box::new(AfbAgent::new(i, n, d, ValueOrdering::MinCost)),
                    Algorithm::AfbBj => Box::new(AfbBjAgent::new(i, n, d)),
                };
                agent
            })
            .collect()
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidParams(format!(
                    "unknown algorithm {s:?} (expected SBB, AFB, AFB-minC or AFB-BJ)"
                ))
            })
    }
}

/// Runs `algorithm` on `problem` under `config`.
pub fn solve(problem: &Problem, algorithm: Algorithm, config: &RunConfig) -> Result<RunReport> {
    run(problem, algorithm.agents(problem), config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("afb-bj".parse::<Algorithm>().unwrap(), Algorithm::AfbBj);
        assert!("ADOPT".parse::<Algorithm>().is_err());
    }
}
