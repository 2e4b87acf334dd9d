//! Boxes and the two grouping constructions used by the recursion.
//!
//! A box reserves `height` units of capacity along `path` for tasks of one
//! (weight, demand) class stacked on top of each other. Linear grouping
//! turns a set of tasks crossing a common edge into few boxes; harmonic
//! grouping turns a set of tasks into placeholder tasks with few distinct
//! lengths plus boxes that later supply real replacements.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::instance::{Task, TaskId};
use crate::matching::b_matching;
use crate::numeric::{Epsilon, Rational};
use crate::profile::{reservation_profile, Edge, EdgeRange};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaskBox {
    pub path: EdgeRange,
    pub height: u64,
    pub demand: u64,
    pub weight: Rational,
}

impl TaskBox {
    /// Whether a single task may be stacked in the box.
    pub fn accepts(&self, task: &Task) -> bool {
        task.weight == self.weight
            && task.demand == self.demand
            && task.window.overlap_len(&self.path) >= task.length
    }

    /// Leftmost start placing `task` inside both the box and its window.
    pub fn leftmost_start(&self, task: &Task) -> Option<Edge> {
        task.window
            .intersect(&self.path)
            .and_then(|r| r.leftmost_fit(task.length))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoxedGuess {
    pub task_box: TaskBox,
    pub count: u64,
}

impl BoxedGuess {
    pub fn new(task_box: TaskBox, count: u64) -> Self {
        Self { task_box, count }
    }

    /// Box of height `count * demand`.
    pub fn tight(path: EdgeRange, demand: u64, weight: Rational, count: u64) -> Self {
        Self {
            task_box: TaskBox {
                path,
                height: demand * count,
                demand,
                weight,
            },
            count,
        }
    }

    pub fn is_consistent(&self) -> bool {
        let b = &self.task_box;
        b.demand > 0 && b.height % b.demand == 0 && self.count * b.demand <= b.height
    }
}

/// Placeholder tasks for one class together with the boxes whose fillers
/// will replace them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtificialBatch {
    pub tasks: Vec<Task>,
    pub boxes: Vec<BoxedGuess>,
    pub weight: Rational,
    pub demand: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupingError {
    #[error("tasks do not share a common edge")]
    NoCommonEdge,
    #[error("tasks do not share one weight and one demand")]
    MixedClass,
    #[error("task {task} placement or window does not match the interval {interval}")]
    OutsideInterval { task: TaskId, interval: EdgeRange },
}

/// Whether the whole set fits: total demand within the height and every
/// task accepted individually.
pub fn fits_in_box(tasks: &[Task], task_box: &TaskBox) -> bool {
    let total: u128 = tasks.iter().map(|t| t.demand as u128).sum();
    total <= task_box.height as u128 && tasks.iter().all(|t| task_box.accepts(t))
}

/// Splits `total` items into `parts` groups, larger groups first.
pub fn split_sizes(total: usize, parts: usize) -> Vec<usize> {
    let (q, r) = (total / parts, total % parts);
    (0..parts).map(|i| q + usize::from(i < r)).collect()
}

/// Splits `total` items into `parts` groups, larger groups last.
pub fn split_sizes_ascending(total: usize, parts: usize) -> Vec<usize> {
    let mut s = split_sizes(total, parts);
    s.reverse();
    s
}

fn check_class(tasks: &[(Task, Edge)]) -> Result<(), GroupingError> {
    if let Some((first, _)) = tasks.first() {
        if tasks
            .iter()
            .any(|(t, _)| t.weight != first.weight || t.demand != first.demand)
        {
            return Err(GroupingError::MixedClass);
        }
    }
    Ok(())
}

fn chunk<T: Clone>(items: &[T], sizes: &[usize]) -> Vec<Vec<T>> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut at = 0;
    for &s in sizes {
        out.push(items[at..at + s].to_vec());
        at += s;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearGrouping {
    pub kept: Vec<TaskId>,
    pub boxes: Vec<BoxedGuess>,
    /// Tasks assigned to each box, aligned with `boxes`.
    pub parts: Vec<Vec<TaskId>>,
    /// Number of dropped tasks the construction allows at most.
    pub loss_bound: usize,
}

/// Linear grouping of placed same-class tasks that share an edge into at
/// most `1/eps^2` boxes.
pub fn linear_grouping_boxes(
    tasks: &[(Task, Edge)],
    eps: Epsilon,
) -> Result<LinearGrouping, GroupingError> {
    check_class(tasks)?;
    let Some((first, _)) = tasks.first() else {
        return Ok(LinearGrouping {
            kept: vec![],
            boxes: vec![],
            parts: vec![],
            loss_bound: 0,
        });
    };
    let (d, w) = (first.demand, first.weight.clone());
    let paths: Vec<EdgeRange> = tasks.iter().map(|(t, s)| t.path(*s)).collect();
    let common = paths
        .iter()
        .skip(1)
        .try_fold(paths[0], |acc, p| acc.intersect(p));
    if common.is_none() {
        return Err(GroupingError::NoCommonEdge);
    }
    let k = eps.inverse() as usize;
    let n = tasks.len();
    if n <= k * k {
        return Ok(LinearGrouping {
            kept: tasks.iter().map(|(t, _)| t.id).collect(),
            boxes: paths
                .iter()
                .map(|&p| BoxedGuess::tight(p, d, w.clone(), 1))
                .collect(),
            parts: tasks.iter().map(|(t, _)| vec![t.id]).collect(),
            loss_bound: 0,
        });
    }

    let mut by_left: Vec<(EdgeRange, TaskId)> =
        paths.iter().zip(tasks).map(|(&p, (t, _))| (p, t.id)).collect();
    by_left.sort_by_key(|&(p, id)| (p.lo, id));
    let outer = chunk(&by_left, &split_sizes(n, k));
    let mut out = LinearGrouping {
        kept: vec![],
        boxes: vec![],
        parts: vec![],
        loss_bound: outer[0].len(),
    };
    for group in outer.iter().skip(1) {
        let Some(left_end) = group.iter().map(|(p, _)| p.lo).min() else {
            continue;
        };
        let mut by_right = group.clone();
        by_right.sort_by_key(|&(p, id)| (std::cmp::Reverse(p.hi), id));
        let inner = chunk(&by_right, &split_sizes(group.len(), k));
        out.loss_bound += inner[0].len();
        for part in inner.iter().skip(1).filter(|p| !p.is_empty()) {
            let right_end = part.iter().map(|(p, _)| p.hi).max().expect("nonempty");
            let ids: Vec<TaskId> = part.iter().map(|&(_, id)| id).collect();
            out.boxes.push(BoxedGuess::tight(
                EdgeRange::new(left_end, right_end),
                d,
                w.clone(),
                ids.len() as u64,
            ));
            out.kept.extend(&ids);
            out.parts.push(ids);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmonicGrouping {
    pub batch: ArtificialBatch,
    /// Start of each placeholder, aligned with `batch.tasks`.
    pub starts: Vec<Edge>,
    /// Box index of each placeholder, aligned with `batch.tasks`.
    pub group_of: Vec<usize>,
    /// Disjoint subsets of the input filling each box exactly.
    pub witnesses: Vec<Vec<TaskId>>,
}

/// Rounds the lengths of placed same-class tasks into at most `1/eps`
/// values. Placeholder ids are `first_id, first_id + 1, ...`.
pub fn harmonic_grouping(
    tasks: &[(Task, Edge)],
    interval: EdgeRange,
    eps: Epsilon,
    first_id: u64,
) -> Result<HarmonicGrouping, GroupingError> {
    check_class(tasks)?;
    for (t, s) in tasks {
        if !interval.contains_range(&t.path(*s)) || !t.window.contains_range(&interval) {
            return Err(GroupingError::OutsideInterval {
                task: t.id,
                interval,
            });
        }
    }
    let (d, w) = match tasks.first() {
        Some((t, _)) => (t.demand, t.weight.clone()),
        None => {
            return Ok(HarmonicGrouping {
                batch: ArtificialBatch {
                    tasks: vec![],
                    boxes: vec![],
                    weight: Rational::from_integer(1.into()),
                    demand: 1,
                },
                starts: vec![],
                group_of: vec![],
                witnesses: vec![],
            })
        }
    };
    let placeholder = |id: u64, length: u64| Task {
        id: TaskId(id),
        demand: d,
        weight: w.clone(),
        length,
        window: interval,
        artificial: true,
    };
    let rightmost = |len: u64| EdgeRange::new(interval.hi + 1 - len, interval.hi);
    let k = eps.inverse() as usize;
    let mut out = HarmonicGrouping {
        batch: ArtificialBatch {
            tasks: vec![],
            boxes: vec![],
            weight: w.clone(),
            demand: d,
        },
        starts: vec![],
        group_of: vec![],
        witnesses: vec![],
    };
    if tasks.len() <= k {
        for (i, (t, s)) in tasks.iter().enumerate() {
            out.batch.tasks.push(placeholder(first_id + i as u64, t.length));
            out.starts.push(*s);
            out.group_of.push(i);
            out.batch
                .boxes
                .push(BoxedGuess::tight(rightmost(t.length), d, w.clone(), 1));
            out.witnesses.push(vec![t.id]);
        }
        return Ok(out);
    }

    let mut sorted: Vec<&(Task, Edge)> = tasks.iter().collect();
    sorted.sort_by_key(|(t, _)| (std::cmp::Reverse(t.length), t.id));
    // The first group is the one dropped, so it gets the smaller size.
    let groups = chunk(&sorted, &split_sizes_ascending(sorted.len(), k));
    let mut slot = 0;
    for group in groups.iter().skip(1).filter(|g| !g.is_empty()) {
        let len = group[0].0.length;
        let bi = out.batch.boxes.len();
        out.batch
            .boxes
            .push(BoxedGuess::tight(rightmost(len), d, w.clone(), group.len() as u64));
        out.witnesses.push(group.iter().map(|(t, _)| t.id).collect());
        for _ in 0..group.len() {
            let (host, host_start) = sorted[slot];
            let host_end = host.path(*host_start).hi;
            out.batch
                .tasks
                .push(placeholder(first_id + out.batch.tasks.len() as u64, len));
            out.starts.push(host_end + 1 - len);
            out.group_of.push(bi);
            slot += 1;
        }
    }
    Ok(out)
}

/// Assigns exactly `count` accepted tasks to every box, each task at most
/// once. Returns task indices per box.
pub fn b_matching_assign(tasks: &[Task], boxes: &[BoxedGuess]) -> Option<Vec<Vec<usize>>> {
    if boxes.iter().any(|b| !b.is_consistent()) {
        return None;
    }
    let demand: Vec<usize> = boxes.iter().map(|b| b.count as usize).collect();
    b_matching(&demand, tasks.len(), |b, t| boxes[b].task_box.accepts(&tasks[t]))
}

/// Injective map from scheduled placeholders to box fillers such that each
/// filler fits inside the placeholder's path. `None` when the inputs break
/// the preconditions or no such map exists.
pub fn replacement_map(
    scheduled: &[(Task, Edge)],
    fills: &[(BoxedGuess, Vec<Task>)],
    leftmost_edge: Edge,
) -> Option<BTreeMap<TaskId, TaskId>> {
    for (b, q) in fills {
        if q.len() as u64 != b.count || !fits_in_box(q, &b.task_box) {
            return None;
        }
        if q.iter().any(|t| !t.window.contains(leftmost_edge)) {
            return None;
        }
    }
    let fillers: Vec<&Task> = fills.iter().flat_map(|(_, q)| q.iter()).collect();
    let demand = vec![1usize; scheduled.len()];
    let assignment = b_matching(&demand, fillers.len(), |a, f| {
        let (art, start) = &scheduled[a];
        let filler = fillers[f];
        filler.weight == art.weight
            && filler.demand == art.demand
            && art.path(*start).overlap_len(&filler.window) >= filler.length
    })?;
    Some(
        assignment
            .iter()
            .enumerate()
            .map(|(a, f)| (scheduled[a].0.id, fillers[f[0]].id))
            .collect(),
    )
}

/// Demand profile of placed tasks over `span`.
pub fn placed_profile(span: EdgeRange, placed: &[(Task, Edge)]) -> crate::profile::CapacityProfile {
    reservation_profile(span, placed.iter().map(|(t, s)| (t.path(*s), t.demand)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::int;
    use proptest::prelude::*;

    fn task(id: u64, d: u64, p: u64, lo: u64, hi: u64) -> Task {
        Task::new(id, d, int(1), p, EdgeRange::new(lo, hi))
    }

    fn eps(k: u64) -> Epsilon {
        Epsilon::reciprocal(k).unwrap()
    }

    #[test]
    fn fits_examples() {
        let b = TaskBox {
            path: EdgeRange::new(2, 4),
            height: 2,
            demand: 2,
            weight: int(1),
        };
        assert!(fits_in_box(&[], &b));
        assert!(fits_in_box(&[task(1, 2, 3, 1, 6)], &b));
        assert!(!fits_in_box(&[task(1, 2, 3, 3, 6)], &b));
        assert!(!fits_in_box(&[task(1, 2, 3, 1, 6), task(2, 2, 1, 1, 6)], &b));
    }

    #[test]
    fn small_sets_get_one_box_each() {
        let placed = vec![(task(1, 1, 2, 1, 8), 3), (task(2, 1, 3, 1, 8), 2)];
        let g = linear_grouping_boxes(&placed, eps(2)).unwrap();
        assert_eq!(g.boxes.len(), 2);
        assert_eq!(g.boxes[0].task_box.path, EdgeRange::new(3, 4));
        assert_eq!(g.boxes[1].task_box.path, EdgeRange::new(2, 4));
        assert_eq!(g.kept.len(), 2);
    }

    #[test]
    fn grouping_errors() {
        let apart = vec![(task(1, 1, 1, 1, 8), 1), (task(2, 1, 1, 1, 8), 5)];
        assert_eq!(linear_grouping_boxes(&apart, eps(2)), Err(GroupingError::NoCommonEdge));
        let mixed = vec![(task(1, 1, 1, 1, 8), 1), (task(2, 2, 1, 1, 8), 1)];
        assert_eq!(linear_grouping_boxes(&mixed, eps(2)), Err(GroupingError::MixedClass));
    }

    #[test]
    fn harmonic_copy_case() {
        let i = EdgeRange::new(5, 8);
        let placed = vec![(task(1, 1, 2, 1, 8), 6), (task(2, 1, 1, 1, 8), 5)];
        let h = harmonic_grouping(&placed, i, eps(2), 100).unwrap();
        assert_eq!(h.batch.tasks.len(), 2);
        assert_eq!(h.starts, vec![6, 5]);
        assert_eq!(h.batch.boxes[0].task_box.path, EdgeRange::new(7, 8));
        assert_eq!(h.batch.boxes[1].task_box.path, EdgeRange::new(8, 8));
        assert!(h.batch.tasks.iter().all(|t| t.artificial && t.window == i));
        // each copy maps to the unique occupant of its box
        let sched: Vec<(Task, Edge)> = h
            .batch
            .tasks
            .iter()
            .cloned()
            .zip(h.starts.iter().copied())
            .collect();
        let fills: Vec<(BoxedGuess, Vec<Task>)> = h
            .batch
            .boxes
            .iter()
            .cloned()
            .zip(vec![vec![task(7, 1, 2, 4, 8)], vec![task(8, 1, 1, 4, 8)]])
            .collect();
        let f = replacement_map(&sched, &fills, 5).unwrap();
        assert_eq!(f[&TaskId(100)], TaskId(7));
        assert_eq!(f[&TaskId(101)], TaskId(8));
    }

    #[test]
    fn harmonic_nine_tasks_third() {
        let i = EdgeRange::new(1, 16);
        let placed: Vec<(Task, Edge)> = (0..9)
            .map(|j| (task(j, 1, 9 - j, 1, 16), 1))
            .collect();
        let h = harmonic_grouping(&placed, i, eps(3), 50).unwrap();
        assert_eq!(h.batch.tasks.len(), 6);
        let mut lengths: Vec<u64> = h.batch.tasks.iter().map(|t| t.length).collect();
        lengths.dedup();
        // groups {9,8,7}, {6,5,4}, {3,2,1}; rounded lengths 6 and 3
        assert_eq!(lengths, vec![6, 3]);
        assert_eq!(h.batch.boxes.len(), 2);
        assert!(h.batch.boxes.iter().all(|b| b.count == 3));
    }

    #[test]
    fn assign_examples() {
        assert_eq!(b_matching_assign(&[task(1, 1, 1, 1, 2)], &[]), Some(vec![]));
        let b = BoxedGuess::tight(EdgeRange::new(1, 1), 1, int(1), 1);
        assert_eq!(
            b_matching_assign(&[task(1, 1, 1, 1, 2)], &[b.clone()]),
            Some(vec![vec![0]])
        );
        assert_eq!(b_matching_assign(&[task(1, 1, 1, 2, 2)], &[b]), None);
    }

    fn arb_crossing() -> impl Strategy<Value = (Vec<(Task, Edge)>, u64)> {
        (prop::collection::vec((1u64..6, 0u64..6, 1u64..3), 1..40), 1u64..5).prop_map(|(raw, k)| {
            // all paths contain edge 10
            let placed = raw
                .into_iter()
                .enumerate()
                .map(|(i, (left, right, slack))| {
                    let lo = 10 - left;
                    let hi = 10 + right;
                    let t = Task::new(
                        i as u64,
                        2,
                        int(3),
                        hi - lo + 1,
                        EdgeRange::new(lo.saturating_sub(slack).max(1), hi + slack),
                    );
                    (t, lo)
                })
                .collect();
            (placed, k)
        })
    }

    proptest! {
        #[test]
        fn linear_grouping_properties((placed, k) in arb_crossing()) {
            let e = eps(k);
            let g = linear_grouping_boxes(&placed, e).unwrap();
            prop_assert!(g.boxes.len() as u64 <= k * k);
            let span = EdgeRange::new(1, 40);
            let boxes = reservation_profile(span, g.boxes.iter().map(|b| (b.task_box.path, b.task_box.height)));
            prop_assert!(boxes.dominates(&placed_profile(span, &placed)).unwrap());
            let n = placed.len() as u64;
            let lost = n - g.kept.len() as u64;
            prop_assert!(lost as usize <= g.loss_bound);
            if n > k * k {
                prop_assert!(lost * k <= 6 * n);
            }
            let by_id: BTreeMap<TaskId, Task> = placed.iter().map(|(t, _)| (t.id, t.clone())).collect();
            for (b, part) in g.boxes.iter().zip(&g.parts) {
                let ts: Vec<Task> = part.iter().map(|id| by_id[id].clone()).collect();
                prop_assert!(fits_in_box(&ts, &b.task_box));
                prop_assert_eq!(ts.len() as u64, b.count);
            }
        }

        #[test]
        fn fits_monotone_under_removal(n in 0usize..6, h in 1u64..8) {
            let ts: Vec<Task> = (0..n as u64).map(|i| task(i, 1, 1, 1, 3)).collect();
            let b = TaskBox { path: EdgeRange::new(1, 2), height: h, demand: 1, weight: int(1) };
            if fits_in_box(&ts, &b) && !ts.is_empty() {
                prop_assert!(fits_in_box(&ts[1..], &b));
            }
        }
    }
}
