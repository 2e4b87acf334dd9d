use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use twufp_core::approx::GuessBudget;
use twufp_core::exact::{exact_3dm, OracleLimits};
use twufp_core::gen::{random_3dm, random_3dm_k, random_instance, RandomParams, WindowShape};
use twufp_core::hardness::{matching_to_schedule, reduce_3dm_to_spanufp, schedule_to_matching, ThreeDM};
use twufp_core::instance::{check_schedule, Instance, ScheduleError};
use twufp_core::io::{
    instance_from_json, instance_to_json, schedule_from_json, schedule_to_json, three_dm_from_json, three_dm_to_json,
};
use twufp_core::numeric::{int, parse_rational, Epsilon};
use twufp_core::reductions::pad_for_span;

use crate::args::{BudgetArgs, GenArgs, GenKind, LimitArgs, ReduceCommand, SolveArgs, VerifyArgs};
use crate::error::CliError;
use crate::report::{run_solver, SolverConfig};

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::File {
        path: path.to_owned(),
        source,
    })
}

/// Writes to `path`, or to stdout when absent.
pub fn emit(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::File {
            path: p.clone(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::File {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

pub fn read_instance(path: &Path) -> Result<Instance, CliError> {
    Ok(instance_from_json(&read(path)?)?)
}

fn read_3dm(path: &Path) -> Result<ThreeDM, CliError> {
    Ok(three_dm_from_json(&read(path)?)?)
}

impl From<&LimitArgs> for OracleLimits {
    fn from(l: &LimitArgs) -> Self {
        OracleLimits {
            max_n: l.n,
            max_m: l.m,
            max_nodes: l.nodes,
        }
    }
}

impl From<&BudgetArgs> for GuessBudget {
    fn from(b: &BudgetArgs) -> Self {
        match b.budget_width {
            Some(w) if !b.budget_exhaustive => GuessBudget::bounded(w),
            _ => GuessBudget::exhaustive(),
        }
    }
}

pub fn parse_epsilon(text: &str) -> Result<Epsilon, CliError> {
    let eps: Epsilon = text.parse()?;
    eps.ensure_at_most(2)?;
    Ok(eps)
}

/// Draws a 3DM instance: 3DM-k when `k` is given, otherwise `edges`
/// (default `2q`, capped at `q^3`) uniform hyperedges.
pub fn draw_3dm(q: usize, edges: Option<usize>, k: Option<usize>, seed: u64) -> Result<ThreeDM, CliError> {
    let drawn = match k {
        Some(k) => random_3dm_k(q, k, seed),
        None => random_3dm(q, edges.unwrap_or((2 * q).min(q * q * q)), seed),
    };
    Ok(drawn?)
}

pub fn generate(kind: GenKind, p: &RandomParams, seed: u64) -> Result<Instance, CliError> {
    if p.m == 0 {
        return Err(CliError::Usage("--m must be at least 1".into()));
    }
    Ok(match kind {
        GenKind::Random => random_instance(p, WindowShape::Free, seed),
        GenKind::UfpDegenerate => random_instance(p, WindowShape::Tight, seed),
        GenKind::Span => random_instance(p, WindowShape::Span, seed),
        GenKind::SpanPadded => pad_for_span(&random_instance(p, WindowShape::Span, seed))?,
        GenKind::From3dm | GenKind::ThreeDm => {
            return Err(CliError::Usage("3DM kinds are not random instance families".into()))
        }
    })
}

pub fn cmd_gen(a: &GenArgs) -> Result<(), CliError> {
    let seed = match (a.kind, a.seed) {
        (GenKind::Random, None) => return Err(CliError::Usage("gen random needs --seed".into())),
        (_, s) => s.unwrap_or(0),
    };
    let text = match a.kind {
        GenKind::ThreeDm => three_dm_to_json(&draw_3dm(a.q, a.edges, a.k, seed)?),
        GenKind::From3dm => {
            let k = match &a.input {
                Some(path) => read_3dm(path)?,
                None => draw_3dm(a.q, a.edges, a.k, seed)?,
            };
            instance_to_json(&reduce_3dm_to_spanufp(&k)?)?
        }
        kind => {
            let p = RandomParams {
                n: a.n,
                m: a.m,
                max_demand: a.max_demand,
                max_capacity: a.max_capacity,
                max_weight: a.max_weight,
                fractional_weights: a.fractional,
            };
            instance_to_json(&generate(kind, &p, seed)?)?
        }
    };
    emit(a.output.as_ref(), &text)
}

pub fn cmd_solve(a: &SolveArgs) -> Result<(), CliError> {
    let inst = read_instance(&a.input)?;
    let cfg = SolverConfig {
        algorithm: a.algorithm,
        epsilon: parse_epsilon(&a.epsilon)?,
        budget: (&a.budget).into(),
        limits: (&a.limits).into(),
        oracle: a.oracle,
        trace: a.trace,
    };
    let out = run_solver(&inst, &cfg)?;
    for line in &out.trace {
        eprintln!("{line}");
    }
    emit(a.output.as_ref(), &schedule_to_json(&out.schedule))?;
    let report = serde_json::to_string(&out.report).expect("report serializes") + "\n";
    match &a.report {
        Some(path) => emit(Some(path), &report),
        None => {
            eprint!("{report}");
            Ok(())
        }
    }
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let inst = read_instance(&a.input)?;
    let sched = schedule_from_json(&read(&a.schedule)?)?;
    let aug = parse_rational(&a.augmentation)?;
    let report = match check_schedule(&inst, &sched, &aug) {
        Ok(r) => r,
        Err(e @ ScheduleError::BadAugmentation(_)) => return Err(e.into()),
        Err(e) => return Err(CliError::Infeasible(e.to_string())),
    };
    println!("{report}");
    if report.feasible {
        Ok(())
    } else {
        Err(CliError::Infeasible(format!("schedule overloads edge {}", report.worst_edge.unwrap_or(0))))
    }
}

pub fn cmd_reduce(c: &ReduceCommand) -> Result<(), CliError> {
    match c {
        ReduceCommand::Instance { input, output } => {
            let k = read_3dm(input)?;
            emit(output.as_ref(), &instance_to_json(&reduce_3dm_to_spanufp(&k)?)?)
        }
        ReduceCommand::Matching {
            input,
            matching,
            output,
            limits,
        } => {
            let k = read_3dm(input)?;
            let chosen: Vec<usize> = match matching {
                Some(path) => serde_json::from_str(&read(path)?)
                    .map_err(|e| CliError::Usage(format!("malformed matching: {e}")))?,
                None => exact_3dm(&k, &limits.into())?.1,
            };
            let sched = matching_to_schedule(&k, &chosen)?;
            let inst = reduce_3dm_to_spanufp(&k)?;
            let check = check_schedule(&inst, &sched, &int(1))?;
            if !check.feasible {
                return Err(CliError::Infeasible(format!("mapped schedule fails verification: {check}")));
            }
            emit(output.as_ref(), &schedule_to_json(&sched))
        }
        ReduceCommand::Schedule {
            input,
            schedule,
            output,
        } => {
            let k = read_3dm(input)?;
            let sched = schedule_from_json(&read(schedule)?)?;
            let matching = schedule_to_matching(&k, &sched)?;
            emit(output.as_ref(), &(serde_json::to_string(&matching).expect("indices serialize") + "\n"))
        }
    }
}
