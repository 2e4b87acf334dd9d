//! Exhaustive oracles used as ground truth in tests and benchmarks.

use thiserror::Error;

use crate::approx::IntervalTree;
use crate::hardness::ThreeDM;
use crate::instance::{Instance, Schedule, Task, TaskId};
use crate::numeric::{common_scale, NumericError, Rational};
use crate::profile::Edge;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_n: usize,
    pub max_m: u64,
    /// Search nodes visited before giving up.
    pub max_nodes: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_n: 14,
            max_m: 256,
            max_nodes: 200_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle limit exceeded: {0}")]
    LimitsExceeded(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

struct Search<'a> {
    tasks: Vec<&'a Task>,
    weights: Vec<i128>,
    suffix: Vec<i128>,
    starts: Vec<Vec<Edge>>,
    load: Vec<u64>,
    cap: Vec<u64>,
    current: Vec<(usize, Edge)>,
    value: i128,
    best: Option<(i128, Vec<(TaskId, Edge)>)>,
    nodes: u64,
    max_nodes: u64,
}

impl Search<'_> {
    fn fits(&self, t: usize, s: Edge) -> bool {
        let task = self.tasks[t];
        (s..s + task.length).all(|e| self.load[e as usize] + task.demand <= self.cap[e as usize])
    }

    fn apply(&mut self, t: usize, s: Edge, add: bool) {
        let task = self.tasks[t];
        for e in s..s + task.length {
            if add {
                self.load[e as usize] += task.demand;
            } else {
                self.load[e as usize] -= task.demand;
            }
        }
    }

    fn key(&self) -> Vec<(TaskId, Edge)> {
        let mut k: Vec<(TaskId, Edge)> = self
            .current
            .iter()
            .map(|&(t, s)| (self.tasks[t].id, s))
            .collect();
        k.sort();
        k
    }

    fn offer(&mut self) {
        let better = match &self.best {
            None => true,
            Some((v, k)) => self.value > *v || (self.value == *v && self.key() < *k),
        };
        if better {
            self.best = Some((self.value, self.key()));
        }
    }

    fn run(&mut self, idx: usize) -> Result<(), OracleError> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(OracleError::LimitsExceeded(format!(
                "more than {} search nodes",
                self.max_nodes
            )));
        }
        if let Some((v, _)) = &self.best {
            // Equal-valued branches are still explored for the tie-break.
            if self.value + self.suffix[idx] < *v {
                return Ok(());
            }
        }
        if idx == self.tasks.len() {
            self.offer();
            return Ok(());
        }
        for si in 0..self.starts[idx].len() {
            let s = self.starts[idx][si];
            if self.fits(idx, s) {
                self.apply(idx, s, true);
                self.current.push((idx, s));
                self.value += self.weights[idx];
                self.run(idx + 1)?;
                self.value -= self.weights[idx];
                self.current.pop();
                self.apply(idx, s, false);
            }
        }
        self.run(idx + 1)
    }
}

fn search(
    inst: &Instance,
    limits: &OracleLimits,
    allowed: impl Fn(&Task, Edge) -> bool,
) -> Result<(Rational, Schedule), OracleError> {
    if inst.n() > limits.max_n {
        return Err(OracleError::LimitsExceeded(format!("n = {} > {}", inst.n(), limits.max_n)));
    }
    if inst.m > limits.max_m {
        return Err(OracleError::LimitsExceeded(format!("m = {} > {}", inst.m, limits.max_m)));
    }
    let mut order: Vec<&Task> = inst.tasks.iter().collect();
    order.sort_by(|a, b| b.weight.cmp(&a.weight).then(a.id.cmp(&b.id)));
    let (weights, _) = common_scale(&order.iter().map(|t| t.weight.clone()).collect::<Vec<_>>())?;
    let mut suffix = vec![0i128; order.len() + 1];
    for i in (0..order.len()).rev() {
        suffix[i] = suffix[i + 1] + weights[i];
    }
    let starts = order
        .iter()
        .map(|t| t.starts_within(inst.path()).filter(|&s| allowed(t, s)).collect())
        .collect();
    let mut cap = vec![0u64; inst.m as usize + 1];
    for seg in inst.capacities.segments() {
        for e in seg.range.lo..=seg.range.hi {
            cap[e as usize] = seg.value;
        }
    }
    let mut s = Search {
        tasks: order,
        weights,
        suffix,
        starts,
        load: vec![0; inst.m as usize + 1],
        cap,
        current: vec![],
        value: 0,
        best: None,
        nodes: 0,
        max_nodes: limits.max_nodes,
    };
    s.run(0)?;
    let (_, key) = s.best.expect("the empty schedule is always offered");
    let sched: Schedule = key.into_iter().collect();
    let value = crate::instance::solution_weight(inst, &sched).expect("ids come from the instance");
    Ok((value, sched))
}

/// Maximum-weight feasible schedule by exhaustive search. Ties go to the
/// lexicographically smallest sorted list of `(id, start)` pairs.
pub fn brute_force_opt(inst: &Instance, limits: &OracleLimits) -> Result<(Rational, Schedule), OracleError> {
    search(inst, limits, |_, _| true)
}

/// Optimum over left-constrained schedules: no task runs entirely inside
/// the right child of the tree interval of its level.
pub fn brute_force_left_constrained_opt(
    inst: &Instance,
    tree: &IntervalTree,
    limits: &OracleLimits,
) -> Result<(Rational, Schedule), OracleError> {
    search(inst, limits, |t, s| tree.placement_left_constrained(t, s))
}

/// Maximum set of pairwise node-disjoint hyperedges; returns indices.
pub fn exact_3dm(k: &ThreeDM, limits: &OracleLimits) -> Result<(usize, Vec<usize>), OracleError> {
    let e = k.hyperedges.len();
    if e > 64 || k.q > 64 {
        return Err(OracleError::LimitsExceeded(format!("q = {}, |E| = {e}", k.q)));
    }
    struct M<'a> {
        edges: &'a [(usize, usize, usize)],
        used: [u64; 3],
        chosen: Vec<usize>,
        best: Vec<usize>,
        nodes: u64,
        max_nodes: u64,
        cap: usize,
    }
    impl M<'_> {
        fn run(&mut self, i: usize) -> Result<(), OracleError> {
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                return Err(OracleError::LimitsExceeded("3DM search nodes".into()));
            }
            if self.chosen.len() > self.best.len() {
                self.best = self.chosen.clone();
            }
            let remaining = (self.edges.len() - i).min(self.cap - self.chosen.len());
            if i == self.edges.len() || self.chosen.len() + remaining <= self.best.len() {
                return Ok(());
            }
            let (x, y, z) = self.edges[i];
            let bits = [1u64 << (x - 1), 1u64 << (y - 1), 1u64 << (z - 1)];
            if (0..3).all(|s| self.used[s] & bits[s] == 0) {
                for s in 0..3 {
                    self.used[s] |= bits[s];
                }
                self.chosen.push(i);
                self.run(i + 1)?;
                self.chosen.pop();
                for s in 0..3 {
                    self.used[s] &= !bits[s];
                }
            }
            self.run(i + 1)
        }
    }
    let mut m = M {
        edges: &k.hyperedges,
        used: [0; 3],
        chosen: vec![],
        best: vec![],
        nodes: 0,
        max_nodes: limits.max_nodes,
        cap: k.q,
    };
    m.run(0)?;
    Ok((m.best.len(), m.best))
}
