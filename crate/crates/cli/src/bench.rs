//! Benchmark tables. A config lists instance families, solvers and
//! accuracies; every (instance, solver, accuracy) triple becomes one row.
//! Rows run in parallel but are reported in config order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use twufp_core::approx::{GuessBudget, IntervalTree};
use twufp_core::exact::OracleLimits;
use twufp_core::gen::RandomParams;
use twufp_core::hardness::reduce_3dm_to_spanufp;
use twufp_core::instance::Instance;
use twufp_core::numeric::{int, to_f64, Epsilon};

use crate::args::{Algorithm, GenKind};
use crate::commands::{draw_3dm, generate, parse_epsilon};
use crate::error::CliError;
use crate::report::{run_solver, RunReport, SolverConfig};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Family {
    pub name: String,
    pub kind: GenKind,
    #[serde(default = "Family::default_n")]
    pub n: usize,
    #[serde(default = "Family::default_m")]
    pub m: u64,
    #[serde(default = "Family::default_count")]
    pub count: u64,
    /// Instance `i` uses seed `seed + i`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "Family::default_max_demand")]
    pub max_demand: u64,
    #[serde(default = "Family::default_max_capacity")]
    pub max_capacity: u64,
    #[serde(default = "Family::default_max_weight")]
    pub max_weight: u64,
    #[serde(default)]
    pub fractional: bool,
    #[serde(default = "Family::default_q")]
    pub q: usize,
    #[serde(default)]
    pub edges: Option<usize>,
    #[serde(default)]
    pub k: Option<usize>,
}

impl Family {
    fn default_n() -> usize {
        5
    }
    fn default_m() -> u64 {
        8
    }
    fn default_count() -> u64 {
        1
    }
    fn default_max_demand() -> u64 {
        4
    }
    fn default_max_capacity() -> u64 {
        6
    }
    fn default_max_weight() -> u64 {
        10
    }
    fn default_q() -> usize {
        2
    }

    fn instance(&self, seed: u64) -> Result<Instance, CliError> {
        match self.kind {
            GenKind::From3dm => Ok(reduce_3dm_to_spanufp(&draw_3dm(self.q, self.edges, self.k, seed)?)?),
            GenKind::ThreeDm => Err(CliError::Usage(format!("family {}: three-dm is not an instance kind", self.name))),
            kind => {
                let p = RandomParams {
                    n: self.n,
                    m: self.m,
                    max_demand: self.max_demand,
                    max_capacity: self.max_capacity,
                    max_weight: self.max_weight,
                    fractional_weights: self.fractional,
                };
                generate(kind, &p, seed)
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    pub n: usize,
    pub m: u64,
    pub nodes: u64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub families: Vec<Family>,
    #[serde(default)]
    pub solvers: Vec<Algorithm>,
    /// Accuracies for approx rows; `["1/4"]` when empty.
    #[serde(default)]
    pub epsilons: Vec<String>,
    /// Run the exact oracle for non-exact rows.
    #[serde(default)]
    pub oracle: bool,
    #[serde(default)]
    pub budget_width: Option<usize>,
    #[serde(default)]
    pub limits: Option<Limits>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRow {
    pub family: String,
    pub seed: u64,
    pub solver: String,
    #[serde(flatten)]
    pub report: Option<RunReport>,
    /// Approx rows with an oracle: whether `ratio <= 2 + 6 eps log2 m'`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub within_bound: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

struct Job<'a> {
    family: &'a Family,
    seed: u64,
    algorithm: Algorithm,
    epsilon: Epsilon,
}

pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRow>, CliError> {
    let mut epsilons = config
        .epsilons
        .iter()
        .map(|e| parse_epsilon(e))
        .collect::<Result<Vec<_>, _>>()?;
    if epsilons.is_empty() {
        epsilons.push(Epsilon::reciprocal(4)?);
    }
    let limits = config.limits.as_ref().map_or_else(OracleLimits::default, |l| OracleLimits {
        max_n: l.n,
        max_m: l.m,
        max_nodes: l.nodes,
    });
    let budget = config.budget_width.map_or_else(GuessBudget::exhaustive, GuessBudget::bounded);
    let mut jobs = vec![];
    for family in &config.families {
        for i in 0..family.count {
            for &algorithm in &config.solvers {
                let eps_list: &[Epsilon] = if algorithm == Algorithm::Approx { &epsilons } else { &epsilons[..1] };
                for &epsilon in eps_list {
                    jobs.push(Job {
                        family,
                        seed: family.seed + i,
                        algorithm,
                        epsilon,
                    });
                }
            }
        }
    }
    Ok(jobs
        .par_iter()
        .map(|job| {
            let cfg = SolverConfig {
                algorithm: job.algorithm,
                epsilon: job.epsilon,
                budget,
                limits,
                oracle: config.oracle,
                trace: false,
            };
            let mut row = BenchRow {
                family: job.family.name.clone(),
                seed: job.seed,
                solver: job.algorithm.name().into(),
                report: None,
                within_bound: None,
                error: None,
            };
            match job.family.instance(job.seed).and_then(|inst| Ok((run_solver(&inst, &cfg)?, inst))) {
                Ok((out, inst)) => {
                    if let (Algorithm::Approx, Some(opt)) = (job.algorithm, &out.oracle) {
                        let log = IntervalTree::new(inst.m).height() as u64;
                        let factor = int(2) + int(6) * job.epsilon.value() * int(log);
                        row.within_bound = Some(&out.objective * factor >= *opt);
                    }
                    row.report = Some(out.report);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect())
}

fn ratio_value(r: &str) -> f64 {
    if r == "inf" {
        return f64::INFINITY;
    }
    twufp_core::numeric::parse_rational(r).map_or(f64::NAN, |v| to_f64(&v))
}

/// Aligned text table followed by the worst ratio per family and solver.
pub fn render_table(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:>6} {:<7} {:>5} {:>4} {:>5} {:>3} {:>3} {:>10} {:>10} {:>8} {:>6} {:>9}",
        "family", "seed", "solver", "eps", "n", "m", "W", "D", "objective", "oracle", "ratio", "aug", "ms"
    );
    let mut worst: BTreeMap<(String, String), f64> = BTreeMap::new();
    for row in rows {
        match (&row.report, &row.error) {
            (Some(r), _) => {
                let _ = writeln!(
                    out,
                    "{:<16} {:>6} {:<7} {:>5} {:>4} {:>5} {:>3} {:>3} {:>10} {:>10} {:>8} {:>6} {:>9.2}{}",
                    row.family,
                    row.seed,
                    row.solver,
                    r.epsilon.as_deref().unwrap_or("-"),
                    r.n,
                    r.m,
                    r.w,
                    r.d,
                    r.objective,
                    r.oracle_objective.as_deref().unwrap_or("-"),
                    r.ratio.as_deref().map_or("-".into(), |x| format!("{:.3}", ratio_value(x))),
                    r.augmentation,
                    r.wall_ms,
                    if row.within_bound == Some(false) { "  BOUND VIOLATED" } else { "" }
                );
                if let Some(x) = r.ratio.as_deref() {
                    let e = worst.entry((row.family.clone(), row.solver.clone())).or_insert(1.0);
                    *e = e.max(ratio_value(x));
                }
            }
            (None, err) => {
                let _ = writeln!(
                    out,
                    "{:<16} {:>6} {:<7} error: {}",
                    row.family,
                    row.seed,
                    row.solver,
                    err.as_deref().unwrap_or("unknown")
                );
            }
        }
    }
    if !worst.is_empty() {
        let _ = writeln!(out, "\nworst oracle/objective ratio");
        for ((family, solver), r) in worst {
            let _ = writeln!(out, "  {family:<16} {solver:<7} {r:.3}");
        }
    }
    out
}

pub fn rows_jsonl(rows: &[BenchRow]) -> String {
    rows.iter()
        .map(|r| serde_json::to_string(r).expect("rows serialize") + "\n")
        .collect()
}
