//! Distributed constraint optimization with asynchronous forward bounding.
//!
//! Four solvers run as message-passing agents on a simulated network:
//!
//! * `SBB`, synchronous branch and bound over a single travelling CPA;
//! * `AFB`, which adds concurrent forward-bounding requests;
//! * `AFB-minC`, AFB trying cheaper values first;
//! * `AFB-BJ`, AFB with backjumping on prefix-indexed lower bounds.
//!
//! ```
//! use discop::{gen, solve, Algorithm, RunConfig};
//!
//! let problem = gen::fixture_four_agents();
//! let report = solve(&problem, Algorithm::AfbBj, &RunConfig::default()).unwrap();
//! assert_eq!(report.solution.cost, 5);
//! ```

pub mod afb;
pub mod afb_bj;
pub mod assignment;
pub mod bench;
pub mod bounds;
pub mod error;
pub mod gen;
pub mod io;
pub mod kernel;
pub mod model;
pub mod oracle;
pub mod par;
pub mod sbb;
pub mod solver;
pub mod timestamp;

pub use assignment::PartialAssignment;
pub use error::{Error, Result};
pub use kernel::{Metrics, RunConfig, RunReport, ScheduleMode, Solution};
pub use model::{AgentId, Cost, CostTable, Problem, Value};
pub use par::Execution;
pub use solver::{solve, Algorithm};
