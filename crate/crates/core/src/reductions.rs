//! Preprocessing into instances with few distinct weights and demands.
//!
//! The pipeline guesses the largest profit `w*` of an optimum, keeps the
//! profits within a factor `n/eps` below it and rounds them down to powers
//! of `1 + eps`; it then guesses an offset `r`, splits the tasks into
//! demand ranges separated by gaps, and rounds demands up. Every branch is
//! emitted, and the caller keeps the best union per `(w*, r)`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::instance::{check_schedule, solution_weight, Instance, Schedule, ScheduleError, Task, TaskId};
use crate::numeric::{
    ceil_power_at_least, count_within_log_bound, floor_power, int, power_of_base, Epsilon,
    NumericError, Rational,
};
use crate::profile::EdgeRange;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error(transparent)]
    Epsilon(#[from] NumericError),
    #[error("weight guess {0} does not occur in the instance")]
    UnknownWeight(String),
    #[error("instance is not span-shaped: task {0} has a partial window")]
    NotSpan(TaskId),
    #[error("offset r = {r} outside 0..{k}")]
    BadOffset { r: u32, k: u64 },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// An instance with few distinct weights and demands, plus where its tasks
/// came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedInstance {
    pub inst: Instance,
    pub epsilon: Epsilon,
    pub distinct_weights: usize,
    pub distinct_demands: usize,
    /// Normalized task id to original task id.
    pub back_map: BTreeMap<TaskId, TaskId>,
}

impl NormalizedInstance {
    fn wrap(inst: Instance, epsilon: Epsilon) -> Self {
        let back_map = inst.tasks.iter().map(|t| (t.id, t.id)).collect();
        Self {
            distinct_weights: inst.distinct_weights(),
            distinct_demands: inst.distinct_demands(),
            inst,
            epsilon,
            back_map,
        }
    }

    /// Translates a schedule of the normalized instance to original ids.
    pub fn map_back(&self, sched: &Schedule) -> Schedule {
        sched
            .iter()
            .map(|(id, s)| (*self.back_map.get(&id).unwrap_or(&id), s))
            .collect()
    }
}

/// Which guesses produced a normalized branch.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecombinationToken {
    pub w_star: Rational,
    pub offset: u32,
    pub group: u32,
    /// Common factor divided out of demands and capacities.
    pub demand_scale: u64,
}

/// Keeps tasks with `eps * w_star / n <= w <= w_star` and rounds their
/// weights, scaled by the smallest kept weight, down to powers of `1 + eps`.
pub fn round_profits(
    inst: &Instance,
    eps: Epsilon,
    w_star: &Rational,
) -> Result<NormalizedInstance, ReductionError> {
    eps.ensure_at_most(2)?;
    if !inst.tasks.iter().any(|t| &t.weight == w_star) {
        return Err(ReductionError::UnknownWeight(crate::numeric::format_rational(w_star)));
    }
    let n = inst.n() as u64;
    let floor_weight = eps.value() * w_star / int(n);
    let kept: Vec<&Task> = inst
        .tasks
        .iter()
        .filter(|t| &t.weight <= w_star && t.weight >= floor_weight)
        .collect();
    let smallest = kept
        .iter()
        .map(|t| t.weight.clone())
        .min()
        .expect("w_star itself is kept");
    let tasks = kept
        .into_iter()
        .map(|t| Task {
            weight: floor_power(eps, &(&t.weight / &smallest)).1,
            ..t.clone()
        })
        .collect();
    let out = Instance {
        m: inst.m,
        capacities: inst.capacities.clone(),
        tasks,
    };
    Ok(NormalizedInstance::wrap(out, eps))
}

/// Bounds `[lower, upper)` of demand group `j` for offset `r`, with base
/// `n/eps`. Group 0 is `[1, base^r)`.
pub fn demand_group_bounds(n: u64, eps: Epsilon, r: u32, j: u32) -> (BigUint, BigUint) {
    let k = eps.inverse() as u32;
    let base = BigUint::from(n.max(1) * eps.inverse());
    if j == 0 {
        return (BigUint::one(), num_traits::pow(base, r as usize));
    }
    let lo = r + 1 + (j - 1) * k;
    let hi = r + j * k;
    (
        num_traits::pow(base.clone(), lo as usize),
        num_traits::pow(base, hi as usize),
    )
}

/// Demand groups for offset `r`. Tasks in the gaps between groups are
/// dropped. In group `j` capacities below its lower bound become 0 and
/// capacities are capped at `n` times its upper bound; demands and
/// capacities are then divided by the gcd of the group's demands.
/// Returns one instance per group, empty ones included.
pub fn demand_range_split(
    inst: &Instance,
    eps: Epsilon,
    r: u32,
) -> Result<Vec<Instance>, ReductionError> {
    Ok(demand_groups(inst, eps, r, inst.n() as u64)?
        .into_iter()
        .map(|(inst, _)| inst)
        .collect())
}

/// Same as [`demand_range_split`] with an explicit task count for the
/// base and with each group's scale factor.
pub fn demand_groups(
    inst: &Instance,
    eps: Epsilon,
    r: u32,
    n: u64,
) -> Result<Vec<(Instance, u64)>, ReductionError> {
    let k = eps.inverse();
    if r as u64 >= k {
        return Err(ReductionError::BadOffset { r, k });
    }
    let top = BigUint::from(
        inst.max_capacity()
            .max(inst.tasks.iter().map(|t| t.demand).max().unwrap_or(0)),
    );
    let mut out = Vec::new();
    let mut j = 0;
    loop {
        let (lower, upper) = demand_group_bounds(n, eps, r, j);
        if j > 0 && lower > top {
            break;
        }
        let in_group = |d: u64| {
            let d = BigUint::from(d);
            lower <= d && d < upper
        };
        let tasks: Vec<&Task> = inst.tasks.iter().filter(|t| in_group(t.demand)).collect();
        let scale = tasks.iter().fold(0u64, |g, t| g.gcd(&t.demand)).max(1);
        let cap_limit = BigUint::from(n.max(1)) * &upper;
        let capacities = inst.capacities.map_values(|u| {
            let big = BigUint::from(u);
            if big < lower {
                0
            } else {
                let capped = if big > cap_limit {
                    cap_limit.to_u64().unwrap_or(u64::MAX)
                } else {
                    u
                };
                capped / scale
            }
        });
        let tasks = tasks
            .into_iter()
            .map(|t| Task {
                demand: t.demand / scale,
                ..t.clone()
            })
            .collect();
        out.push((
            Instance {
                m: inst.m,
                capacities,
                tasks,
            },
            scale,
        ));
        j += 1;
    }
    Ok(out)
}

/// Rounds every demand up to the integer grid `ceil((1 + eps)^t)`.
pub fn round_demands(inst: &Instance, eps: Epsilon) -> Instance {
    Instance {
        m: inst.m,
        capacities: inst.capacities.clone(),
        tasks: inst
            .tasks
            .iter()
            .map(|t| Task {
                demand: ceil_power_at_least(eps, t.demand),
                ..t.clone()
            })
            .collect(),
    }
}

/// Doubles the path with zero-capacity edges and stretches every window to
/// the new path. Requires every window to be the whole path.
pub fn pad_for_span(inst: &Instance) -> Result<Instance, ReductionError> {
    let path = inst.path();
    if let Some(t) = inst.tasks.iter().find(|t| t.window != path) {
        return Err(ReductionError::NotSpan(t.id));
    }
    let m = 2 * inst.m;
    Ok(Instance {
        m,
        capacities: inst.capacities.extend_right(m, 0),
        tasks: inst
            .tasks
            .iter()
            .map(|t| Task {
                window: EdgeRange::new(1, m),
                ..t.clone()
            })
            .collect(),
    })
}

/// Every normalized branch of `inst`, one per `(w*, r, group)` with at
/// least one task. Capacities of a branch are raised to
/// `floor((1 + eps) u)` after demand rounding so that any solution of the
/// unrounded group stays feasible.
pub fn preprocess(
    inst: &Instance,
    eps: Epsilon,
) -> Result<Vec<(NormalizedInstance, RecombinationToken)>, ReductionError> {
    eps.ensure_at_most(2)?;
    let n = inst.n() as u64;
    let mut guesses: Vec<Rational> = inst.tasks.iter().map(|t| t.weight.clone()).collect();
    guesses.sort();
    guesses.dedup();
    let k = eps.inverse();
    let mut out = Vec::new();
    for w_star in guesses {
        let profits = round_profits(inst, eps, &w_star)?;
        for r in 0..k as u32 {
            for (j, (group, scale)) in demand_groups(&profits.inst, eps, r, n)?.into_iter().enumerate() {
                if group.tasks.is_empty() {
                    continue;
                }
                let mut rounded = round_demands(&group, eps);
                rounded.capacities = rounded.capacities.map_values(|u| u + u / k);
                out.push((
                    NormalizedInstance::wrap(rounded, eps),
                    RecombinationToken {
                        w_star: w_star.clone(),
                        offset: r,
                        group: j as u32,
                        demand_scale: scale,
                    },
                ));
            }
        }
    }
    Ok(out)
}

/// Augmentation under which recombined schedules are guaranteed feasible.
pub fn recombination_augmentation(eps: Epsilon) -> Rational {
    Rational::one() + int(4) * eps.value()
}

/// Unions the branch schedules of each `(w*, r)` pair and keeps the pair
/// with the largest original weight. Ties keep the earliest pair.
pub fn recombine(
    original: &Instance,
    branches: &[(RecombinationToken, Schedule)],
) -> Result<Schedule, ReductionError> {
    let mut unions: BTreeMap<(Rational, u32), Schedule> = BTreeMap::new();
    for (token, sched) in branches {
        let entry = unions
            .entry((token.w_star.clone(), token.offset))
            .or_default();
        *entry = entry.union(sched);
    }
    let mut best = Schedule::new();
    let mut best_weight = Rational::zero();
    for sched in unions.into_values() {
        let w = solution_weight(original, &sched)?;
        if w > best_weight {
            best_weight = w;
            best = sched;
        }
    }
    Ok(best)
}

/// Broken normalization invariants, for testing and diagnostics.
pub fn normalization_violations(norm: &NormalizedInstance, original_n: usize) -> Vec<String> {
    let eps = norm.epsilon;
    let n = original_n.max(1) as u64;
    let ratio = int(n * eps.inverse());
    let mut out = Vec::new();
    for t in &norm.inst.tasks {
        let (_, p) = floor_power(eps, &t.weight.clone().max(Rational::one()));
        if p != t.weight {
            out.push(format!("task {}: weight is not a power of 1+eps", t.id));
        }
        if t.weight > ratio {
            out.push(format!("task {}: weight above n/eps", t.id));
        }
        if ceil_power_at_least(eps, t.demand) != t.demand {
            out.push(format!("task {}: demand off the grid", t.id));
        }
    }
    if !count_within_log_bound(eps, norm.distinct_weights as u64, &ratio) {
        out.push(format!("{} distinct weights is too many", norm.distinct_weights));
    }
    // D <= (1/eps) log_{1+eps}(n/eps) + 1
    let k = eps.inverse();
    let d = norm.distinct_demands as u64;
    if d > 1 && power_of_base(eps, (d - 1) as u32) > num_traits::pow(ratio.clone(), k as usize) {
        out.push(format!("{d} distinct demands is too many"));
    }
    out
}

/// Checks a recombined schedule against the original capacities.
pub fn recombined_feasible(
    original: &Instance,
    sched: &Schedule,
    eps: Epsilon,
) -> Result<bool, ReductionError> {
    Ok(check_schedule(original, sched, &recombination_augmentation(eps))?.feasible)
}
