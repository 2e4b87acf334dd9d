//! Hardness gadgets: 3-dimensional matching instances, the number system
//! with unique zero sums, and the reduction to spanUFP with maps between
//! hypermatchings and schedules.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{check_schedule, Instance, Schedule, Task, TaskId};
use crate::numeric::int;
use crate::profile::{reservation_profile, CapacityProfile, Edge, EdgeRange, Segment};

/// Hyperedge `(i, j, k)` with 1-based node indices into X, Y and Z.
pub type Hyperedge = (usize, usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreeDM {
    pub q: usize,
    pub hyperedges: Vec<Hyperedge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_bound: Option<usize>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HardnessError {
    #[error("invalid 3DM instance: {0}")]
    Invalid(String),
    #[error("not a hypermatching: {0}")]
    NotAMatching(String),
    #[error("need at least q = {q} hyperedges to fill every interval, got {edges}")]
    TooFewHyperedges { q: usize, edges: usize },
    #[error("schedule infeasible: {0}")]
    Infeasible(String),
    #[error("schedule contradicts the interval structure: {0}")]
    Structural(String),
    #[error("enumeration limit exceeded: {0}")]
    LimitsExceeded(String),
    #[error("a k bound is required")]
    MissingBound,
}

impl ThreeDM {
    pub fn new(q: usize, hyperedges: Vec<Hyperedge>, k_bound: Option<usize>) -> Result<Self, HardnessError> {
        let k = Self {
            q,
            hyperedges,
            k_bound,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<(), HardnessError> {
        if self.q == 0 {
            return Err(HardnessError::Invalid("q must be positive".into()));
        }
        let mut seen = BTreeSet::new();
        for &(i, j, k) in &self.hyperedges {
            if [i, j, k].iter().any(|&v| v == 0 || v > self.q) {
                return Err(HardnessError::Invalid(format!("({i}, {j}, {k}) outside 1..{}", self.q)));
            }
            if !seen.insert((i, j, k)) {
                return Err(HardnessError::Invalid(format!("duplicate hyperedge ({i}, {j}, {k})")));
            }
        }
        if let Some(bound) = self.k_bound {
            for (side, counts) in self.occurrences().iter().enumerate() {
                for (v, &c) in counts.iter().enumerate() {
                    if c == 0 || c > bound {
                        return Err(HardnessError::Invalid(format!(
                            "node {} of side {} occurs {c} times, bound {bound}",
                            v + 1,
                            ["X", "Y", "Z"][side]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Occurrence counts per side, indexed by node - 1.
    pub fn occurrences(&self) -> [Vec<usize>; 3] {
        let mut occ = [vec![0; self.q], vec![0; self.q], vec![0; self.q]];
        for &(i, j, k) in &self.hyperedges {
            occ[0][i - 1] += 1;
            occ[1][j - 1] += 1;
            occ[2][k - 1] += 1;
        }
        occ
    }

    /// Checks that `matching` lists distinct, node-disjoint hyperedges.
    pub fn check_matching(&self, matching: &[usize]) -> Result<(), HardnessError> {
        let mut used = [BTreeSet::new(), BTreeSet::new(), BTreeSet::new()];
        let mut seen = BTreeSet::new();
        for &l in matching {
            let &(i, j, k) = self
                .hyperedges
                .get(l)
                .ok_or_else(|| HardnessError::NotAMatching(format!("no hyperedge {l}")))?;
            if !seen.insert(l) {
                return Err(HardnessError::NotAMatching(format!("hyperedge {l} repeated")));
            }
            for (side, v) in [i, j, k].into_iter().enumerate() {
                if !used[side].insert(v) {
                    return Err(HardnessError::NotAMatching(format!(
                        "hyperedge {l} reuses node {v} of side {}",
                        ["X", "Y", "Z"][side]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A member of X, Y, Z (1-based node) or E (1-based hyperedge).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GadgetElement {
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
}

impl GadgetElement {
    /// Dense index: X first, then Y, Z and the hyperedges.
    pub fn index(self, q: usize) -> usize {
        match self {
            GadgetElement::X(i) => i - 1,
            GadgetElement::Y(j) => q + j - 1,
            GadgetElement::Z(k) => 2 * q + k - 1,
            GadgetElement::H(l) => 3 * q + l - 1,
        }
    }

    pub fn from_index(idx: usize, q: usize) -> Self {
        match idx / q {
            0 => GadgetElement::X(idx + 1),
            1 => GadgetElement::Y(idx - q + 1),
            2 => GadgetElement::Z(idx - 2 * q + 1),
            _ => GadgetElement::H(idx - 3 * q + 1),
        }
    }

    pub fn left_task(self, q: usize) -> TaskId {
        TaskId(2 * self.index(q) as u64)
    }

    pub fn right_task(self, q: usize) -> TaskId {
        TaskId(2 * self.index(q) as u64 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetNumbers {
    pub q: usize,
    pub rho: i128,
    pub x: Vec<i128>,
    pub y: Vec<i128>,
    pub z: Vec<i128>,
    pub h: Vec<i128>,
    pub hyperedges: Vec<Hyperedge>,
    pub mu: i128,
    pub a: i128,
}

impl GadgetNumbers {
    pub fn value(&self, el: GadgetElement) -> i128 {
        match el {
            GadgetElement::X(i) => self.x[i - 1],
            GadgetElement::Y(j) => self.y[j - 1],
            GadgetElement::Z(k) => self.z[k - 1],
            GadgetElement::H(l) => self.h[l - 1],
        }
    }

    pub fn elements(&self) -> Vec<GadgetElement> {
        (0..3 * self.q + self.h.len())
            .map(|idx| GadgetElement::from_index(idx, self.q))
            .collect()
    }

    /// Length and demand of the left task of `el`.
    pub fn left_task_shape(&self, el: GadgetElement) -> (u64, u64) {
        let u = 10 * self.value(el);
        ((self.a - u) as u64, (self.a + u + 1) as u64)
    }

    pub fn right_task_shape(&self, el: GadgetElement) -> (u64, u64) {
        let u = 10 * self.value(el);
        ((self.a + u) as u64, (self.a - u) as u64)
    }

    pub fn path_len(&self) -> u64 {
        ((2 * self.a + 1) * self.q as i128 - 1) as u64
    }

    /// First edge of the 0-based interval `t`.
    pub fn interval_start(&self, t: usize) -> Edge {
        (t as i128 * (2 * self.a + 1) + 1) as Edge
    }
}

pub fn numbers_qk(k: &ThreeDM) -> GadgetNumbers {
    let q = k.q as i128;
    let rho = (3 * q).max(29);
    let x = (1..=q).map(|i| i * rho + 1).collect::<Vec<_>>();
    let y = (1..=q).map(|j| j * rho * rho + 2).collect::<Vec<_>>();
    let z = (1..=q).map(|k| k * rho * rho * rho + 4).collect::<Vec<_>>();
    let h = k
        .hyperedges
        .iter()
        .map(|&(i, j, k)| -(i as i128) * rho - (j as i128) * rho * rho - (k as i128) * rho * rho * rho - 7)
        .collect::<Vec<_>>();
    let largest = x.iter().chain(&y).chain(&z).chain(&h).map(|v| v.abs()).max().unwrap_or(0);
    let mu = 1 + 10 * largest;
    GadgetNumbers {
        q: k.q,
        rho,
        x,
        y,
        z,
        h,
        hyperedges: k.hyperedges.clone(),
        mu,
        a: 5 * mu + 4,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniqueSum {
    pub holds: bool,
    /// First 4-subset whose zero-sum status disagrees with being a
    /// hyperedge quadruple.
    pub counterexample: Option<[GadgetElement; 4]>,
}

/// Exhaustive check over 4-subsets of distinct elements.
pub fn check_unique_sum(nums: &GadgetNumbers, max_elements: usize) -> Result<UniqueSum, HardnessError> {
    let els = nums.elements();
    if els.len() > max_elements {
        return Err(HardnessError::LimitsExceeded(format!(
            "{} numbers, limit {max_elements}",
            els.len()
        )));
    }
    let quads: BTreeSet<[GadgetElement; 4]> = nums
        .hyperedges
        .iter()
        .enumerate()
        .map(|(l, &(i, j, k))| {
            [
                GadgetElement::X(i),
                GadgetElement::Y(j),
                GadgetElement::Z(k),
                GadgetElement::H(l + 1),
            ]
        })
        .collect();
    let n = els.len();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let set = [els[a], els[b], els[c], els[d]];
                    let zero = set.iter().map(|&e| nums.value(e)).sum::<i128>() == 0;
                    if zero != quads.contains(&set) {
                        return Ok(UniqueSum {
                            holds: false,
                            counterexample: Some(set),
                        });
                    }
                }
            }
        }
    }
    Ok(UniqueSum {
        holds: true,
        counterexample: None,
    })
}

fn gadget_instance(nums: &GadgetNumbers) -> Instance {
    let a = nums.a as u64;
    let m = nums.path_len();
    let mut segments = Vec::with_capacity(3 * nums.q);
    for t in 0..nums.q {
        let s = nums.interval_start(t);
        segments.push(Segment {
            range: EdgeRange::new(s, s + a - 1),
            value: 4 * a + 4,
        });
        segments.push(Segment {
            range: EdgeRange::new(s + a, s + 2 * a - 1),
            value: 4 * a,
        });
        if t + 1 < nums.q {
            segments.push(Segment {
                range: EdgeRange::new(s + 2 * a, s + 2 * a),
                value: 0,
            });
        }
    }
    let span = EdgeRange::new(1, m);
    let capacities = CapacityProfile::from_segments(span, &segments).expect("segments tile the path");
    let mut tasks = Vec::with_capacity(2 * nums.elements().len());
    for el in nums.elements() {
        let (len, d) = nums.left_task_shape(el);
        tasks.push(Task::new(el.left_task(nums.q).0, d, int(1), len, span));
        let (len, d) = nums.right_task_shape(el);
        tasks.push(Task::new(el.right_task(nums.q).0, d, int(1), len, span));
    }
    Instance::new(m, capacities, tasks).expect("gadget tasks are valid")
}

pub fn reduce_3dm_to_spanufp(k: &ThreeDM) -> Result<Instance, HardnessError> {
    k.validate()?;
    Ok(gadget_instance(&numbers_qk(k)))
}

/// Left tasks start at the interval's first edge, right tasks end at its
/// last edge.
fn place_in_interval(
    nums: &GadgetNumbers,
    t: usize,
    left: &[GadgetElement],
    right: &[GadgetElement],
    sched: &mut Schedule,
) {
    let base = nums.interval_start(t);
    let last = base + 2 * nums.a as u64 - 1;
    for &el in left {
        sched.insert(el.left_task(nums.q), base);
    }
    for &el in right {
        let (len, _) = nums.right_task_shape(el);
        sched.insert(el.right_task(nums.q), last + 1 - len);
    }
}

/// Seven tasks from a quadruple: both tasks of each node plus one task of
/// the hyperedge, chosen by the sign of the quadruple's sum.
fn place_seven(nums: &GadgetNumbers, t: usize, quad: [GadgetElement; 4], sched: &mut Schedule) {
    let tau: i128 = quad.iter().map(|&e| nums.value(e)).sum();
    let nodes = &quad[..3];
    if tau > 0 {
        let right: Vec<_> = quad.to_vec();
        place_in_interval(nums, t, nodes, &right, sched);
    } else {
        place_in_interval(nums, t, &quad, nodes, sched);
    }
}

/// Schedule with `|matching| + 7q` tasks: matched hyperedges saturate the
/// first intervals, leftovers are paired in ascending order.
pub fn matching_to_schedule(k: &ThreeDM, matching: &[usize]) -> Result<Schedule, HardnessError> {
    k.validate()?;
    k.check_matching(matching)?;
    if k.hyperedges.len() < k.q {
        return Err(HardnessError::TooFewHyperedges {
            q: k.q,
            edges: k.hyperedges.len(),
        });
    }
    let nums = numbers_qk(k);
    let mut sched = Schedule::new();
    let mut used = [BTreeSet::new(), BTreeSet::new(), BTreeSet::new()];
    for (t, &l) in matching.iter().enumerate() {
        let (i, j, kk) = k.hyperedges[l];
        used[0].insert(i);
        used[1].insert(j);
        used[2].insert(kk);
        let quad = [
            GadgetElement::X(i),
            GadgetElement::Y(j),
            GadgetElement::Z(kk),
            GadgetElement::H(l + 1),
        ];
        place_in_interval(&nums, t, &quad, &quad, &mut sched);
    }
    let free = |side: usize| (1..=k.q).filter(|v| !used[side].contains(v)).collect::<Vec<_>>();
    let (xs, ys, zs) = (free(0), free(1), free(2));
    let hs: Vec<usize> = (0..k.hyperedges.len()).filter(|l| !matching.contains(l)).collect();
    for (off, t) in (matching.len()..k.q).enumerate() {
        let quad = [
            GadgetElement::X(xs[off]),
            GadgetElement::Y(ys[off]),
            GadgetElement::Z(zs[off]),
            GadgetElement::H(hs[off] + 1),
        ];
        place_seven(&nums, t, quad, &mut sched);
    }
    Ok(sched)
}

fn element_of(id: TaskId, q: usize) -> GadgetElement {
    GadgetElement::from_index((id.0 / 2) as usize, q)
}

/// Recovers a hypermatching from a feasible schedule: one hyperedge per
/// interval holding 8 tasks.
pub fn schedule_to_matching(k: &ThreeDM, sched: &Schedule) -> Result<Vec<usize>, HardnessError> {
    k.validate()?;
    let nums = numbers_qk(k);
    let inst = gadget_instance(&nums);
    let report = check_schedule(&inst, sched, &int(1)).map_err(|e| HardnessError::Infeasible(e.to_string()))?;
    if !report.feasible {
        return Err(HardnessError::Infeasible(report.to_string()));
    }
    let width = 2 * nums.a as u64 + 1;
    let mut per_interval: BTreeMap<u64, Vec<TaskId>> = BTreeMap::new();
    for (id, s) in sched.iter() {
        per_interval.entry((s - 1) / width).or_default().push(id);
    }
    let mut matching = Vec::new();
    for (t, ids) in per_interval {
        if ids.len() > 8 {
            return Err(HardnessError::Structural(format!("{} tasks in interval {t}", ids.len())));
        }
        if ids.len() < 8 {
            continue;
        }
        let hyper: Vec<usize> = ids
            .iter()
            .filter_map(|&id| match element_of(id, k.q) {
                GadgetElement::H(l) => Some(l - 1),
                _ => None,
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let [l] = hyper[..] else {
            return Err(HardnessError::Structural(format!(
                "interval {t} holds tasks of {} hyperedges",
                hyper.len()
            )));
        };
        let (i, j, kk) = k.hyperedges[l];
        let expected: BTreeSet<TaskId> = [
            GadgetElement::X(i),
            GadgetElement::Y(j),
            GadgetElement::Z(kk),
            GadgetElement::H(l + 1),
        ]
        .into_iter()
        .flat_map(|el| [el.left_task(k.q), el.right_task(k.q)])
        .collect();
        if ids.iter().copied().collect::<BTreeSet<_>>() != expected {
            return Err(HardnessError::Structural(format!(
                "interval {t} is saturated but not by hyperedge {}",
                l + 1
            )));
        }
        matching.push(l);
    }
    matching.sort_unstable();
    k.check_matching(&matching)
        .map_err(|e| HardnessError::Structural(e.to_string()))?;
    Ok(matching)
}

/// Optimum of the reduction instance from its interval structure: each
/// interval is saturated by one hyperedge (8 tasks) or filled with 7.
/// Returns the optimum and the saturating hyperedges.
pub fn structured_optimum(k: &ThreeDM, max_nodes: u64) -> Result<(usize, Vec<usize>), HardnessError> {
    k.validate()?;
    if k.hyperedges.len() < k.q {
        return Err(HardnessError::TooFewHyperedges {
            q: k.q,
            edges: k.hyperedges.len(),
        });
    }
    struct Walk<'a> {
        k: &'a ThreeDM,
        chosen: Vec<usize>,
        best: Vec<usize>,
        nodes: u64,
        max_nodes: u64,
    }
    impl Walk<'_> {
        // Interval `t` takes a hyperedge with index >= `from`, or a filler.
        fn run(&mut self, t: usize, from: usize) -> Result<(), HardnessError> {
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                return Err(HardnessError::LimitsExceeded("structured search nodes".into()));
            }
            if self.chosen.len() > self.best.len() {
                self.best = self.chosen.clone();
            }
            if t == self.k.q {
                return Ok(());
            }
            for l in from..self.k.hyperedges.len() {
                self.chosen.push(l);
                if self.k.check_matching(&self.chosen).is_ok() {
                    self.run(t + 1, l + 1)?;
                }
                self.chosen.pop();
            }
            // Filler: later intervals hold no further hyperedges, as saturated
            // intervals are interchangeable.
            Ok(())
        }
    }
    let mut w = Walk {
        k,
        chosen: vec![],
        best: vec![],
        nodes: 0,
        max_nodes,
    };
    w.run(0, 0)?;
    Ok((w.best.len() + 7 * k.q, w.best))
}

/// Largest number of scheduled tasks sharing an edge.
pub fn max_overlap(inst: &Instance, sched: &Schedule) -> Result<u64, HardnessError> {
    let paths = crate::instance::placed_paths(inst, sched).map_err(|e| HardnessError::Infeasible(e.to_string()))?;
    Ok(reservation_profile(inst.path(), paths.into_iter().map(|(r, _)| (r, 1))).max_value())
}

/// Greedy hypermatching: take hyperedges in order, skip conflicting ones.
pub fn greedy_matching_lower_bound(k: &ThreeDM) -> Result<Vec<usize>, HardnessError> {
    if k.k_bound.is_none() {
        return Err(HardnessError::MissingBound);
    }
    k.validate()?;
    let mut used = [vec![false; k.q + 1], vec![false; k.q + 1], vec![false; k.q + 1]];
    let mut out = Vec::new();
    for (l, &(i, j, kk)) in k.hyperedges.iter().enumerate() {
        if !used[0][i] && !used[1][j] && !used[2][kk] {
            used[0][i] = true;
            used[1][j] = true;
            used[2][kk] = true;
            out.push(l);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> ThreeDM {
        ThreeDM::new(1, vec![(1, 1, 1)], Some(1)).unwrap()
    }

    #[test]
    fn numbers_for_single_hyperedge() {
        let n = numbers_qk(&single());
        assert_eq!(n.rho, 29);
        assert_eq!((n.x[0], n.y[0], n.z[0], n.h[0]), (30, 843, 24393, -25266));
        assert_eq!(n.x[0] + n.y[0] + n.z[0] + n.h[0], 0);
        assert_eq!(n.mu, 252_661);
        assert_eq!(n.a, 1_263_309);
    }

    #[test]
    fn rho_switches_at_ten() {
        let k10 = ThreeDM::new(10, vec![(1, 1, 1)], None).unwrap();
        assert_eq!(numbers_qk(&k10).rho, 30);
        let k9 = ThreeDM::new(9, vec![(1, 1, 1)], None).unwrap();
        assert_eq!(numbers_qk(&k9).rho, 29);
    }

    #[test]
    fn mu_closed_form() {
        // With the hyperedge (q, q, q) present the largest magnitude is
        // q(rho + rho^2 + rho^3) + 7, so mu sits 71 above 10q(...), not 8.
        let k = ThreeDM::new(3, vec![(3, 3, 3), (1, 2, 3)], None).unwrap();
        let n = numbers_qk(&k);
        let q = 3i128;
        assert_eq!(n.mu, 10 * q * (n.rho + n.rho.pow(2) + n.rho.pow(3)) + 71);
        assert!(n.a - n.mu > 0);
    }

    #[test]
    fn unique_sum_and_mutation() {
        let n = numbers_qk(&single());
        assert!(check_unique_sum(&n, 30).unwrap().holds);
        let k = ThreeDM::new(2, vec![(1, 1, 1), (1, 2, 2), (2, 2, 2), (2, 1, 2)], None).unwrap();
        let mut n = numbers_qk(&k);
        assert!(check_unique_sum(&n, 30).unwrap().holds);
        n.x[0] += 1;
        let r = check_unique_sum(&n, 30).unwrap();
        assert!(!r.holds);
        assert!(r.counterexample.unwrap().contains(&GadgetElement::X(1)));
    }

    #[test]
    fn reduction_shape() {
        let inst = reduce_3dm_to_spanufp(&single()).unwrap();
        assert_eq!(inst.m, 2_526_618);
        assert_eq!(inst.n(), 8);
        assert!(inst.is_span());
        let a = 1_263_309u64;
        assert_eq!(inst.capacities.value_at(1), 4 * a + 4);
        assert_eq!(inst.capacities.value_at(a + 1), 4 * a);
        let mu = 252_661u64;
        for t in &inst.tasks {
            assert!(t.length >= a - mu && t.length <= a + mu);
            assert!(t.demand >= a - mu && t.demand <= a + mu);
            let is_left = t.id.0 % 2 == 0;
            // left: d + len = 2A + 1, right: d + len = 2A
            assert_eq!(t.demand + t.length, 2 * a + u64::from(is_left));
        }
    }

    #[test]
    fn separators_have_zero_capacity() {
        let k = ThreeDM::new(2, vec![(1, 1, 1), (2, 2, 2)], None).unwrap();
        let n = numbers_qk(&k);
        let inst = reduce_3dm_to_spanufp(&k).unwrap();
        assert_eq!(inst.m, n.path_len());
        assert_eq!(inst.capacities.value_at(2 * n.a as u64 + 1), 0);
    }

    #[test]
    fn round_trip_q1() {
        let k = single();
        let inst = reduce_3dm_to_spanufp(&k).unwrap();
        let full = matching_to_schedule(&k, &[0]).unwrap();
        assert_eq!(full.len(), 8);
        assert!(check_schedule(&inst, &full, &int(1)).unwrap().feasible);
        assert_eq!(schedule_to_matching(&k, &full).unwrap(), vec![0]);
        assert!(max_overlap(&inst, &full).unwrap() <= 4);
        let seven = matching_to_schedule(&k, &[]).unwrap();
        assert_eq!(seven.len(), 7);
        assert!(check_schedule(&inst, &seven, &int(1)).unwrap().feasible);
        assert_eq!(schedule_to_matching(&k, &seven).unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn seven_task_layouts_for_both_signs() {
        // (1,1,1) unmatched with X2,Y2,Z2 leftovers gives tau > 0 with h = (1,1,1).
        let k = ThreeDM::new(2, vec![(1, 1, 1), (2, 2, 2), (1, 2, 1)], None).unwrap();
        let inst = reduce_3dm_to_spanufp(&k).unwrap();
        for m in [vec![], vec![0], vec![1], vec![0, 1], vec![2]] {
            let s = matching_to_schedule(&k, &m).unwrap();
            assert_eq!(s.len(), m.len() + 14);
            assert!(check_schedule(&inst, &s, &int(1)).unwrap().feasible, "matching {m:?}");
            assert!(schedule_to_matching(&k, &s).unwrap().len() >= m.len());
        }
        // X1, Y1, Z1 with hyperedge (2,2,2): negative sum
        let k = ThreeDM::new(2, vec![(2, 2, 2), (1, 1, 1)], None).unwrap();
        let s = matching_to_schedule(&k, &[]).unwrap();
        let inst = reduce_3dm_to_spanufp(&k).unwrap();
        assert!(check_schedule(&inst, &s, &int(1)).unwrap().feasible);
    }

    #[test]
    fn rejects_non_matchings() {
        let k = ThreeDM::new(2, vec![(1, 1, 1), (1, 2, 2), (2, 2, 2)], None).unwrap();
        assert!(matches!(matching_to_schedule(&k, &[0, 1]), Err(HardnessError::NotAMatching(_))));
    }

    #[test]
    fn overfull_interval_rejected() {
        let k = ThreeDM::new(2, vec![(1, 1, 1), (2, 2, 2)], None).unwrap();
        let mut s = matching_to_schedule(&k, &[0, 1]).unwrap();
        // move the left task of X2 into the first interval: nine tasks there
        s.insert(GadgetElement::X(2).left_task(2), 1);
        assert!(matches!(schedule_to_matching(&k, &s), Err(HardnessError::Infeasible(_))));
    }

    #[test]
    fn structured_optimum_small() {
        let k = ThreeDM::new(2, vec![(1, 1, 1), (1, 2, 2), (2, 2, 2)], None).unwrap();
        assert_eq!(structured_optimum(&k, 1_000_000).unwrap(), (16, vec![0, 2]));
    }

    #[test]
    fn greedy_examples() {
        assert_eq!(greedy_matching_lower_bound(&single()).unwrap(), vec![0]);
        let k = ThreeDM::new(2, vec![(1, 1, 1), (2, 2, 2)], None).unwrap();
        assert_eq!(greedy_matching_lower_bound(&k), Err(HardnessError::MissingBound));
    }

    #[test]
    fn k_bound_validation() {
        assert!(ThreeDM::new(2, vec![(1, 1, 1)], Some(2)).is_err());
        assert!(ThreeDM::new(1, vec![(1, 1, 1)], Some(1)).is_ok());
        assert!(ThreeDM::new(1, vec![(1, 1, 2)], None).is_err());
    }
}
