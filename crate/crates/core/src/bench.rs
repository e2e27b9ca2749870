//! Instance sweeps over tightness values, CSV output and summary statistics.
//!
//! CSV columns, in this fixed order:
//!
//! ```text
//! algorithm,n,d,p1,p2,seed,optimal_cost,nc_steps,ncccs,msgs_total,
//! msgs_cpa,msgs_fb,msgs_est,msgs_sol,msgs_term[,wall_ms]
//! ```
//!
//! `wall_ms` is present only when timing was requested, so default output is
//! a pure function of the sweep parameters.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gen::{generate, GenParams};
use crate::kernel::{MessageKind, RunConfig, ScheduleMode, DEFAULT_MESSAGE_BUDGET};
use crate::model::Cost;
use crate::oracle::{self, DEFAULT_BUDGET};
use crate::par::{self, Execution};
use crate::solver::{solve, Algorithm};

pub const CSV_COLUMNS: [&str; 15] = [
    "algorithm",
    "n",
    "d",
    "p1",
    "p2",
    "seed",
    "optimal_cost",
    "nc_steps",
    "ncccs",
    "msgs_total",
    "msgs_cpa",
    "msgs_fb",
    "msgs_est",
    "msgs_sol",
    "msgs_term",
];

/// Scheduling used for every run of a sweep. Async seeds are derived from
/// the instance seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeSpec {
    Deterministic,
    Async { max_delay: u32 },
    Threaded,
}

impl ModeSpec {
    pub fn schedule(self, instance_seed: u64) -> ScheduleMode {
        match self {
            ModeSpec::Deterministic => ScheduleMode::Deterministic,
            ModeSpec::Async { max_delay } => ScheduleMode::Async {
                seed: splitmix64(instance_seed ^ 0xA5A5_A5A5_A5A5_A5A5),
                max_delay,
            },
            ModeSpec::Threaded => ScheduleMode::Threaded,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub n: usize,
    pub d: usize,
    pub p1: f64,
    pub p2_values: Vec<f64>,
    pub instances_per_point: usize,
    pub base_seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub mode: ModeSpec,
    pub execution: Execution,
    /// Leaf budget of the exact cross-check; larger instances are only
    /// checked for agreement between algorithms.
    pub oracle_budget: u128,
    pub message_budget: u64,
    pub timing: bool,
}

impl SweepSpec {
    pub fn new(
        n: usize,
        d: usize,
        p1: f64,
        p2_values: Vec<f64>,
        instances_per_point: usize,
    ) -> Self {
        Self {
            n,
            d,
            p1,
            p2_values,
            instances_per_point,
            base_seed: 0,
            algorithms: Algorithm::ALL.to_vec(),
            mode: ModeSpec::Deterministic,
            execution: Execution::default(),
            oracle_budget: DEFAULT_BUDGET,
            message_budget: DEFAULT_MESSAGE_BUDGET,
            timing: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::InvalidParams("no algorithms selected".into()));
        }
        if self.p2_values.is_empty() {
            return Err(Error::InvalidParams("no p2 values given".into()));
        }
        if self.p2_values.len() > u32::MAX as usize || self.instances_per_point > u32::MAX as usize
        {
            return Err(Error::InvalidParams("sweep too large".into()));
        }
        for &p2 in &self.p2_values {
            GenParams::new(self.n, self.d, self.p1, p2, 0).validate()?;
        }
        Ok(())
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator seed of instance `instance` at tightness index `p2_index`.
pub fn derive_seed(base_seed: u64, p2_index: usize, instance: usize) -> u64 {
    splitmix64(base_seed.wrapping_add(((p2_index as u64) << 32) | instance as u64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub algorithm: String,
    pub n: usize,
    pub d: usize,
    pub p1: f64,
    pub p2: f64,
    pub seed: u64,
    pub optimal_cost: Cost,
    pub nc_steps: u64,
    pub ncccs: u64,
    pub msgs_total: u64,
    pub msgs_cpa: u64,
    pub msgs_fb: u64,
    pub msgs_est: u64,
    pub msgs_sol: u64,
    pub msgs_term: u64,
    #[serde(default)]
    pub wall_ms: Option<f64>,
}

impl SweepRow {
    fn record(&self) -> Vec<String> {
        let mut out = vec![
            self.algorithm.clone(),
            self.n.to_string(),
            self.d.to_string(),
            self.p1.to_string(),
            self.p2.to_string(),
            self.seed.to_string(),
            self.optimal_cost.to_string(),
            self.nc_steps.to_string(),
            self.ncccs.to_string(),
            self.msgs_total.to_string(),
            self.msgs_cpa.to_string(),
            self.msgs_fb.to_string(),
            self.msgs_est.to_string(),
            self.msgs_sol.to_string(),
            self.msgs_term.to_string(),
        ];
        if let Some(ms) = self.wall_ms {
            out.push(format!("{ms:.3}"));
        }
        out
    }
}

/// Runs every algorithm on one instance and checks the results.
fn run_instance(spec: &SweepSpec, p2: f64, seed: u64) -> Result<Vec<SweepRow>> {
    let problem = generate(&GenParams::new(spec.n, spec.d, spec.p1, p2, seed))?;
    let reference = match oracle::solve_exact_with_budget(&problem, spec.oracle_budget) {
        Ok(r) => Some(r.optimal_cost),
        Err(Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let config = RunConfig {
        message_budget: spec.message_budget,
        ..RunConfig::with_mode(spec.mode.schedule(seed))
    };
    let mut rows: Vec<SweepRow> = Vec::with_capacity(spec.algorithms.len());
    for &alg in &spec.algorithms {
        let start = Instant::now();
        let report = solve(&problem, alg, &config).map_err(|e| Error::Disagreement {
            seed,
            detail: format!("{alg} failed: {e}"),
        })?;
        let wall_ms = spec.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
        let cost = report.solution.cost;
        if problem.full_cost(&report.solution.values) != cost {
            return Err(Error::Disagreement {
                seed,
                detail: format!("{alg} reported cost {cost} for an assignment of a different cost"),
            });
        }
        if let Some(opt) = reference {
            if cost != opt {
                return Err(Error::Disagreement {
                    seed,
                    detail: format!("{alg} found {cost}, exact optimum is {opt}"),
                });
            }
        }
        if let Some(first) = rows.first() {
            if first.optimal_cost != cost {
                return Err(Error::Disagreement {
                    seed,
                    detail: format!(
                        "{} found {}, {alg} found {cost}",
                        first.algorithm, first.optimal_cost
                    ),
                });
            }
        }
        let m = &report.metrics;
        rows.push(SweepRow {
            algorithm: alg.name().to_string(),
            n: spec.n,
            d: spec.d,
            p1: spec.p1,
            p2,
            seed,
            optimal_cost: cost,
            nc_steps: m.nc_steps,
            ncccs: m.ncccs,
            msgs_total: m.messages_total,
            msgs_cpa: m.messages(MessageKind::CpaMsg),
            msgs_fb: m.messages(MessageKind::FbCpa),
            msgs_est: m.messages(MessageKind::FbEstimate),
            msgs_sol: m.messages(MessageKind::NewSolution),
            msgs_term: m.messages(MessageKind::Terminate),
            wall_ms,
        });
    }
    Ok(rows)
}

/// Runs the sweep. Rows come back ordered by p2 index, instance, then the
/// order of `spec.algorithms`, regardless of execution strategy.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let cells: Vec<(f64, u64)> = spec
        .p2_values
        .iter()
        .enumerate()
        .flat_map(|(pi, &p2)| {
            (0..spec.instances_per_point)
                .map(move |inst| (p2, derive_seed(spec.base_seed, pi, inst)))
        })
        .collect();
    let results = par::map(spec.execution, cells, |(p2, seed)| {
        run_instance(spec, p2, seed)
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
    if rows.iter().any(|r| r.wall_ms.is_some()) {
        header.push("wall_ms");
    }
    w.write_record(&header)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[SweepRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn read_csv<R: Read>(source: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_reader(source);
    let header = rdr.headers()?.clone();
    let expected = CSV_COLUMNS.iter().copied();
    if !header.iter().take(CSV_COLUMNS.len()).eq(expected) {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    rdr.deserialize()
        .enumerate()
        .map(|(k, r)| {
            r.map_err(|e| Error::Parse {
                line: k + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Mean and median of one metric over one (algorithm, p2) cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub median: f64,
}

impl Stat {
    fn of(values: &mut [u64]) -> Self {
        values.sort_unstable();
        let len = values.len();
        let mean = values.iter().map(|&v| v as f64).sum::<f64>() / len as f64;
        let median = if len % 2 == 1 {
            values[len / 2] as f64
        } else {
            (values[len / 2 - 1] as f64 + values[len / 2] as f64) / 2.0
        };
        Stat { mean, median }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub p2: f64,
    pub count: usize,
    pub nc_steps: Stat,
    pub ncccs: Stat,
    pub msgs_total: Stat,
}

/// Aggregates rows per (algorithm, p2): algorithms in order of first
/// appearance, p2 ascending.
pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut algs: Vec<&str> = Vec::new();
    let mut cells: BTreeMap<(usize, u64), Vec<&SweepRow>> = BTreeMap::new();
    for r in rows {
        let ai = match algs.iter().position(|&a| a == r.algorithm) {
            Some(ai) => ai,
            None => {
                algs.push(&r.algorithm);
                algs.len() - 1
            }
        };
        // p2 is non-negative, so its bit pattern orders like the value.
        cells.entry((ai, r.p2.to_bits())).or_default().push(r);
    }
    cells
        .into_iter()
        .map(|((ai, p2), group)| {
            let collect = |f: fn(&SweepRow) -> u64| group.iter().map(|r| f(r)).collect::<Vec<_>>();
            SummaryRow {
                algorithm: algs[ai].to_string(),
                p2: f64::from_bits(p2),
                count: group.len(),
                nc_steps: Stat::of(&mut collect(|r| r.nc_steps)),
                ncccs: Stat::of(&mut collect(|r| r.ncccs)),
                msgs_total: Stat::of(&mut collect(|r| r.msgs_total)),
            }
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(summary: &[SummaryRow], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "algorithm",
        "p2",
        "count",
        "mean_nc_steps",
        "median_nc_steps",
        "mean_ncccs",
        "median_ncccs",
        "mean_msgs_total",
        "median_msgs_total",
    ])?;
    for s in summary {
        w.write_record([
            s.algorithm.clone(),
            s.p2.to_string(),
            s.count.to_string(),
            format!("{:.3}", s.nc_steps.mean),
            format!("{:.1}", s.nc_steps.median),
            format!("{:.3}", s.ncccs.mean),
            format!("{:.1}", s.ncccs.median),
            format!("{:.3}", s.msgs_total.mean),
            format!("{:.1}", s.msgs_total.median),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Whitespace-separated blocks, one per algorithm, separated by two blank
/// lines so gnuplot can address them with `index`.
pub fn write_gnuplot<W: Write>(summary: &[SummaryRow], mut sink: W) -> Result<()> {
    let mut current: Option<&str> = None;
    for s in summary {
        if current != Some(&s.algorithm) {
            if current.is_some() {
                writeln!(sink, "\n")?;
            }
            writeln!(sink, "# {}", s.algorithm)?;
            writeln!(sink, "# p2 mean_nc_steps mean_ncccs mean_msgs_total")?;
            current = Some(&s.algorithm);
        }
        writeln!(
            sink,
            "{} {:.3} {:.3} {:.3}",
            s.p2, s.nc_steps.mean, s.ncccs.mean, s.msgs_total.mean
        )?;
    }
    Ok(())
}
