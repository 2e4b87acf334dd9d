use std::time::Instant;

use serde::{Deserialize, Serialize};

use twufp_core::approx::{solve_approx_traced, GuessBudget};
use twufp_core::exact::{brute_force_opt, OracleLimits};
use twufp_core::greedy::greedy_schedule;
use twufp_core::instance::{check_schedule, solution_weight, Instance, Schedule};
use twufp_core::numeric::{format_rational, int, Epsilon, Rational};

use crate::args::Algorithm;
use crate::error::CliError;

/// One solver run. Rationals are written as `"p/q"` strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: usize,
    pub m: u64,
    /// Distinct weights.
    pub w: usize,
    /// Distinct demands.
    pub d: usize,
    pub solver: String,
    pub epsilon: Option<String>,
    pub objective: String,
    pub oracle_objective: Option<String>,
    /// `oracle / objective`; `"inf"` when only the oracle placed weight.
    /// Present exactly when the oracle ran.
    pub ratio: Option<String>,
    /// Factor by which the schedule may exceed capacities.
    pub augmentation: String,
    pub wall_ms: f64,
}

pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub epsilon: Epsilon,
    pub budget: GuessBudget,
    pub limits: OracleLimits,
    pub oracle: bool,
    pub trace: bool,
}

pub struct SolveOutput {
    pub schedule: Schedule,
    pub report: RunReport,
    pub objective: Rational,
    pub oracle: Option<Rational>,
    pub trace: Vec<String>,
}

/// Runs one solver, re-verifies its schedule at the augmentation it
/// claims, and optionally compares against the exact optimum.
pub fn run_solver(inst: &Instance, cfg: &SolverConfig) -> Result<SolveOutput, CliError> {
    let start = Instant::now();
    let mut trace = vec![];
    let (schedule, augmentation, exact_value) = match cfg.algorithm {
        Algorithm::Exact => {
            let (value, sched) = brute_force_opt(inst, &cfg.limits)?;
            (sched, int(1), Some(value))
        }
        Algorithm::Greedy => (greedy_schedule(inst), int(1), None),
        Algorithm::Approx => {
            let out = solve_approx_traced(inst, cfg.epsilon, &cfg.budget, cfg.trace)?;
            trace = out.trace;
            (out.schedule, out.augmentation, None)
        }
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1000.0;
    let check = check_schedule(inst, &schedule, &augmentation)?;
    if !check.feasible {
        return Err(CliError::Infeasible(format!(
            "{} produced a schedule that fails re-verification: {check}",
            cfg.algorithm.name()
        )));
    }
    let objective = solution_weight(inst, &schedule)?;
    let oracle = match exact_value {
        Some(v) => Some(v),
        None if cfg.oracle => Some(brute_force_opt(inst, &cfg.limits)?.0),
        None => None,
    };
    let ratio = oracle.as_ref().map(|opt| ratio_text(opt, &objective));
    let report = RunReport {
        n: inst.n(),
        m: inst.m,
        w: inst.distinct_weights(),
        d: inst.distinct_demands(),
        solver: cfg.algorithm.name().into(),
        epsilon: (cfg.algorithm == Algorithm::Approx).then(|| cfg.epsilon.to_string()),
        objective: format_rational(&objective),
        oracle_objective: oracle.as_ref().map(format_rational),
        ratio,
        augmentation: format_rational(&augmentation),
        wall_ms,
    };
    Ok(SolveOutput {
        schedule,
        report,
        objective,
        oracle,
        trace,
    })
}

fn ratio_text(opt: &Rational, objective: &Rational) -> String {
    if *objective > int(0) {
        format_rational(&(opt / objective))
    } else if *opt > int(0) {
        "inf".into()
    } else {
        "1".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use twufp_core::numeric::rational;

    #[test]
    fn ratio_cases() {
        assert_eq!(ratio_text(&int(6), &int(4)), "3/2");
        assert_eq!(ratio_text(&int(3), &int(0)), "inf");
        assert_eq!(ratio_text(&int(0), &int(0)), "1");
        assert_eq!(ratio_text(&rational(5, 2), &rational(5, 2)), "1");
    }
}
