//! Recursive approximation on a binary decomposition of the path.
//!
//! A subproblem owns one interval of the decomposition, a residual capacity
//! profile, a pool of tasks and a list of boxes that must be filled from the
//! pool. It guesses boxes for tasks crossing its middle, placeholder tasks
//! standing in for pool tasks that end up right of the middle, and how the
//! inherited boxes split between the halves, then recurses on both halves.
//! Guessing is exhaustive enumeration, optionally capped by a [`GuessBudget`].
//!
//! A placeholder created at depth `D` may only fill boxes created strictly
//! deeper than `D`. Objectives count placeholders at full weight: each one
//! scheduled on the right is swapped for a real task of the same class when
//! the two halves are combined.
//!
//! The tests check outputs against `2 + 6 eps log2 m'` times the optimum
//! (and `1 - 6 eps log2 m'` for left-constrained optima). The constant 6 is
//! our own accounting of the per-level packing and grouping losses.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use num_bigint::BigInt;
use thiserror::Error;

use crate::grouping::{split_sizes, split_sizes_ascending, ArtificialBatch, BoxedGuess, TaskBox};
use crate::instance::{check_schedule, solution_weight, Instance, Schedule, ScheduleError, Task, TaskId};
use crate::matching::b_matching;
use crate::numeric::{common_scale, format_rational, Epsilon, NumericError, Rational};
use crate::profile::{reservation_profile, CapacityProfile, Edge, EdgeRange};
use crate::reductions::{
    preprocess, recombination_augmentation, recombine, NormalizedInstance, RecombinationToken, ReductionError,
};

/// Aligned dyadic intervals over `[1, m']`, `m'` the least power of two
/// `>= m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntervalTree {
    size: u64,
}

impl IntervalTree {
    pub fn new(m: u64) -> Self {
        Self {
            size: m.max(1).next_power_of_two(),
        }
    }

    /// `m'`.
    pub fn size(&self) -> u64 {
        self.size
    }

    /// `log2 m'`, the level of the leaves.
    pub fn height(&self) -> u32 {
        self.size.trailing_zeros()
    }

    pub fn root(&self) -> EdgeRange {
        EdgeRange::new(1, self.size)
    }

    pub fn level(&self, interval: EdgeRange) -> u32 {
        self.height() - interval.len().trailing_zeros()
    }

    pub fn children(&self, interval: EdgeRange) -> Option<(EdgeRange, EdgeRange)> {
        if interval.len() < 2 {
            return None;
        }
        let last_left = interval.lo + interval.len() / 2 - 1;
        Some((
            EdgeRange::new(interval.lo, last_left),
            EdgeRange::new(last_left + 1, interval.hi),
        ))
    }

    /// Last edge of the left child; the middle vertex sits right after it.
    pub fn mid(&self, interval: EdgeRange) -> Option<Edge> {
        self.children(interval).map(|(l, _)| l.hi)
    }

    /// The level-`level` interval containing edge `e`.
    pub fn interval_at(&self, level: u32, e: Edge) -> EdgeRange {
        let shift = self.height() - level;
        let idx = (e - 1) >> shift;
        EdgeRange::new((idx << shift) + 1, (idx + 1) << shift)
    }

    /// Deepest level whose interval contains all of `window`.
    pub fn window_level(&self, window: EdgeRange) -> u32 {
        let diff = (window.lo - 1) ^ (window.hi - 1);
        let bits = 64 - diff.leading_zeros();
        self.height().saturating_sub(bits)
    }

    /// False iff a real task placed at `start` lies inside the right child
    /// of the interval of its level.
    pub fn placement_left_constrained(&self, task: &Task, start: Edge) -> bool {
        if task.artificial {
            return true;
        }
        let level = self.window_level(task.window);
        match self.children(self.interval_at(level, task.window.lo)) {
            None => true,
            Some((left, _)) => task.path(start).lo <= left.hi,
        }
    }
}

pub fn task_level(task: &Task, tree: &IntervalTree) -> u32 {
    tree.window_level(task.window)
}

pub fn is_left_constrained(tree: &IntervalTree, placed: &[(Task, Edge)]) -> bool {
    placed.iter().all(|(t, s)| tree.placement_left_constrained(t, *s))
}

/// Caps on how many alternatives each guess site enumerates. Ignored when
/// `exhaustive` is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GuessBudget {
    pub exhaustive: bool,
    /// Candidate box paths per class at one middle.
    pub box_paths: usize,
    /// Middle box sets per class.
    pub box_sets: usize,
    /// Placeholder length profiles per class.
    pub length_profiles: usize,
    /// Splits of the inherited boxes per subproblem.
    pub splits: usize,
}

impl GuessBudget {
    pub fn exhaustive() -> Self {
        Self {
            exhaustive: true,
            box_paths: usize::MAX,
            box_sets: usize::MAX,
            length_profiles: usize::MAX,
            splits: usize::MAX,
        }
    }

    /// Every cap set to `width`.
    pub fn bounded(width: usize) -> Self {
        Self {
            exhaustive: false,
            box_paths: width,
            box_sets: width,
            length_profiles: width,
            splits: width,
        }
    }

    fn cap(&self, value: usize) -> usize {
        if self.exhaustive {
            usize::MAX
        } else {
            value.max(1)
        }
    }
}

impl Default for GuessBudget {
    fn default() -> Self {
        Self::exhaustive()
    }
}

/// Input of one recursive call. Pool tasks flagged `artificial` are
/// placeholders created by an enclosing call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subproblem {
    pub tree: IntervalTree,
    pub interval: EdgeRange,
    pub residual: CapacityProfile,
    pub task_pool: Vec<Task>,
    pub boxes: Vec<BoxedGuess>,
}

/// Placed tasks plus the fillers of every input box, in input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubSolution {
    pub placed: Vec<(Task, Edge)>,
    pub box_fills: Vec<Vec<Task>>,
    /// Weight of `placed`, placeholders included.
    pub objective: Rational,
}

impl SubSolution {
    pub fn empty(boxes: usize) -> Self {
        Self {
            placed: vec![],
            box_fills: vec![vec![]; boxes],
            objective: Rational::from_integer(0.into()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub subproblems: u64,
    pub memo_hits: u64,
    pub candidates: u64,
}

impl SolveStats {
    fn absorb(&mut self, other: &SolveStats) {
        self.subproblems += other.subproblems;
        self.memo_hits += other.memo_hits;
        self.candidates += other.candidates;
    }
}

#[derive(Debug, Error)]
pub enum ApproxError {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("subproblem is malformed: {0}")]
    Malformed(String),
}

// ---------------------------------------------------------------------------
// Internal search state.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct ArtKind {
    class: u32,
    length: u64,
    window: EdgeRange,
    depth: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Job {
    Real(u32),
    Art(ArtKind, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct BoxSlot {
    path: EdgeRange,
    class: u32,
    depth: i32,
}

/// Depth of boxes handed in through the public entry points.
const INPUT_BOX_DEPTH: i32 = -1;
/// Depth of placeholders handed in through the public entry points.
const INPUT_ART_DEPTH: i32 = -2;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Node {
    interval: EdgeRange,
    residual: CapacityProfile,
    reals: Vec<u32>,
    arts: Vec<(ArtKind, u32)>,
    boxes: Vec<(BoxSlot, u32)>,
    root: bool,
}

#[derive(Debug, Clone)]
struct Sol {
    value: i128,
    placed: Vec<(Job, Edge)>,
    fills: Vec<Vec<Job>>,
}

struct Class {
    w: i128,
    demand: u64,
}

struct Middle {
    boxes: Vec<(BoxSlot, u32)>,
    profit: i128,
    residual: CapacityProfile,
}

#[derive(Default, Clone)]
struct Batch {
    arts: Vec<(ArtKind, u32)>,
    boxes: Vec<(BoxSlot, u32)>,
}

/// Boxes of a child in canonical order, remembering where each role went.
struct ChildBoxes {
    sorted: Vec<(BoxSlot, u32)>,
    position: Vec<usize>,
}

impl ChildBoxes {
    fn new(roles: Vec<(BoxSlot, u32)>) -> Self {
        let mut order: Vec<usize> = (0..roles.len()).collect();
        order.sort_by_key(|&i| roles[i].0);
        let mut position = vec![0; roles.len()];
        for (pos, &i) in order.iter().enumerate() {
            position[i] = pos;
        }
        Self {
            sorted: order.iter().map(|&i| roles[i]).collect(),
            position,
        }
    }
}

fn merge_counts<K: Ord + Copy>(items: impl IntoIterator<Item = (K, u32)>) -> Vec<(K, u32)> {
    let mut m: BTreeMap<K, u32> = BTreeMap::new();
    for (k, c) in items {
        if c > 0 {
            *m.entry(k).or_default() += c;
        }
    }
    m.into_iter().collect()
}

struct Solver<'a> {
    reals: &'a [Task],
    real_class: Vec<u32>,
    classes: Vec<Class>,
    k: usize,
    tree: IntervalTree,
    budget: GuessBudget,
    memo: HashMap<Node, Option<Rc<Sol>>>,
    trace: Option<Vec<String>>,
    scale: BigInt,
    stats: SolveStats,
}

impl<'a> Solver<'a> {
    fn new(
        reals: &'a [Task],
        extra_classes: &[(Rational, u64)],
        tree: IntervalTree,
        eps: Epsilon,
        budget: GuessBudget,
        tracing: bool,
    ) -> Result<(Self, BTreeMap<(Rational, u64), u32>), ApproxError> {
        let mut keys: BTreeSet<(Rational, u64)> = reals.iter().map(|t| (t.weight.clone(), t.demand)).collect();
        keys.extend(extra_classes.iter().cloned());
        let keys: Vec<(Rational, u64)> = keys.into_iter().collect();
        let (scaled, scale) = common_scale(&keys.iter().map(|(w, _)| w.clone()).collect::<Vec<_>>())?;
        let index: BTreeMap<(Rational, u64), u32> =
            keys.iter().cloned().enumerate().map(|(i, k)| (k, i as u32)).collect();
        let classes = keys
            .iter()
            .zip(scaled)
            .map(|((_, d), w)| Class { w, demand: *d })
            .collect();
        let real_class = reals.iter().map(|t| index[&(t.weight.clone(), t.demand)]).collect();
        Ok((
            Self {
                reals,
                real_class,
                classes,
                k: eps.inverse() as usize,
                tree,
                budget,
                memo: HashMap::new(),
                trace: tracing.then(Vec::new),
                scale,
                stats: SolveStats::default(),
            },
            index,
        ))
    }

    fn class_of(&self, j: &Job) -> u32 {
        match j {
            Job::Real(i) => self.real_class[*i as usize],
            Job::Art(k, _) => k.class,
        }
    }

    fn len_of(&self, j: &Job) -> u64 {
        match j {
            Job::Real(i) => self.reals[*i as usize].length,
            Job::Art(k, _) => k.length,
        }
    }

    fn window_of(&self, j: &Job) -> EdgeRange {
        match j {
            Job::Real(i) => self.reals[*i as usize].window,
            Job::Art(k, _) => k.window,
        }
    }

    fn weight_of(&self, j: &Job) -> i128 {
        self.classes[self.class_of(j) as usize].w
    }

    fn demand_of(&self, j: &Job) -> u64 {
        self.classes[self.class_of(j) as usize].demand
    }

    fn compat(&self, j: &Job, slot: &BoxSlot) -> bool {
        if let Job::Art(k, _) = j {
            if slot.depth <= k.depth {
                return false;
            }
        }
        self.class_of(j) == slot.class && self.window_of(j).overlap_len(&slot.path) >= self.len_of(j)
    }

    fn jobs(&self, reals: &[u32], arts: &[(ArtKind, u32)]) -> Vec<Job> {
        let mut out: Vec<Job> = reals.iter().map(|&i| Job::Real(i)).collect();
        for (kind, count) in arts {
            out.extend((0..*count).map(|c| Job::Art(*kind, c)));
        }
        out
    }

    fn fillable(&self, boxes: &[(BoxSlot, u32)], jobs: &[Job]) -> bool {
        if boxes.is_empty() {
            return true;
        }
        let demand: Vec<usize> = boxes.iter().map(|(_, c)| *c as usize).collect();
        b_matching(&demand, jobs.len(), |b, t| self.compat(&jobs[t], &boxes[b].0)).is_some()
    }

    fn fits_somewhere(&self, j: &Job, within: EdgeRange, residual: &CapacityProfile) -> bool {
        match self.window_of(j).intersect(&within) {
            Some(w) => residual.first_fit(w, self.len_of(j), self.demand_of(j)).is_some(),
            None => false,
        }
    }

    fn upper_bound(&self, within: EdgeRange, residual: &CapacityProfile, jobs: &[Job]) -> i128 {
        jobs.iter()
            .filter(|j| self.fits_somewhere(j, within, residual))
            .map(|j| self.weight_of(j))
            .sum()
    }

    fn solve(&mut self, node: Node) -> Option<Rc<Sol>> {
        if let Some(hit) = self.memo.get(&node) {
            self.stats.memo_hits += 1;
            return hit.clone();
        }
        self.stats.subproblems += 1;
        let out = if node.interval.len() == 1 {
            self.base(&node)
        } else {
            self.internal(&node)
        }
        .map(Rc::new);
        self.memo.insert(node, out.clone());
        out
    }

    fn base(&mut self, node: &Node) -> Option<Sol> {
        let e = node.interval.lo;
        let cap = node.residual.value_at(e) as u128;
        let jobs = self.jobs(&node.reals, &node.arts);
        let mut avail: BTreeMap<u32, usize> = BTreeMap::new();
        for j in &jobs {
            if self.len_of(j) == 1 && self.window_of(j).contains(e) {
                *avail.entry(self.class_of(j)).or_default() += 1;
            }
        }
        let avail: Vec<(u32, usize)> = avail.into_iter().collect();
        let mut combos: Vec<(i128, Vec<usize>)> = vec![];
        let mut counts = vec![0usize; avail.len()];
        self.count_vectors(&avail, cap, 0, 0, &mut counts, &mut combos);
        combos.sort_by(|a, b| b.0.cmp(&a.0));
        let nb = node.boxes.len();
        for (value, counts) in combos {
            self.stats.candidates += 1;
            let mut demand: Vec<usize> = node.boxes.iter().map(|(_, c)| *c as usize).collect();
            demand.extend(counts.iter().copied());
            let assign = b_matching(&demand, jobs.len(), |b, t| {
                let j = &jobs[t];
                if b < nb {
                    self.compat(j, &node.boxes[b].0)
                } else {
                    self.class_of(j) == avail[b - nb].0 && self.len_of(j) == 1 && self.window_of(j).contains(e)
                }
            });
            if let Some(assign) = assign {
                let placed = assign[nb..].iter().flatten().map(|&t| (jobs[t], e)).collect();
                let fills = assign[..nb]
                    .iter()
                    .map(|ts| ts.iter().map(|&t| jobs[t]).collect())
                    .collect();
                return Some(Sol { value, placed, fills });
            }
        }
        None
    }

    fn count_vectors(
        &self,
        avail: &[(u32, usize)],
        cap: u128,
        i: usize,
        load: u128,
        counts: &mut Vec<usize>,
        out: &mut Vec<(i128, Vec<usize>)>,
    ) {
        if i == avail.len() {
            let value = avail
                .iter()
                .zip(counts.iter())
                .map(|((c, _), n)| self.classes[*c as usize].w * *n as i128)
                .sum();
            out.push((value, counts.clone()));
            return;
        }
        let d = self.classes[avail[i].0 as usize].demand as u128;
        for n in 0..=avail[i].1 {
            let l = load + d * n as u128;
            if l > cap {
                break;
            }
            counts[i] = n;
            self.count_vectors(avail, cap, i + 1, l, counts, out);
        }
        counts[i] = 0;
    }

    fn internal(&mut self, node: &Node) -> Option<Sol> {
        let (li, ri) = self.tree.children(node.interval).expect("interval longer than one edge");
        let depth = self.tree.level(node.interval) as i32;
        let jobs = self.jobs(&node.reals, &node.arts);
        if !self.fillable(&node.boxes, &jobs) {
            return None;
        }
        let (left_reals, right_reals): (Vec<u32>, Vec<u32>) = node
            .reals
            .iter()
            .partition(|&&i| self.reals[i as usize].window.intersects(&li));
        let (left_arts, right_arts): (Vec<(ArtKind, u32)>, Vec<(ArtKind, u32)>) =
            node.arts.iter().partition(|(k, _)| k.window.intersects(&li));
        let left_jobs = self.jobs(&left_reals, &left_arts);
        let right_jobs = self.jobs(&right_reals, &right_arts);

        let mut by_class: BTreeMap<u32, Vec<Job>> = BTreeMap::new();
        for j in &left_jobs {
            by_class.entry(self.class_of(j)).or_default().push(*j);
        }
        let middles = self.middle_guesses(node, li, depth, &by_class);
        let batches = if node.root {
            vec![Batch::default()]
        } else {
            self.batch_guesses(node, li, ri, depth, &by_class)
        };

        let mut ranges = Vec::with_capacity(node.boxes.len());
        for (slot, n) in &node.boxes {
            let cap_l = left_jobs.iter().filter(|j| self.compat(j, slot)).count() as u32;
            let cap_r = right_jobs.iter().filter(|j| self.compat(j, slot)).count() as u32;
            let lo = n.saturating_sub(cap_r);
            let hi = (*n).min(cap_l);
            if lo > hi {
                return None;
            }
            ranges.push((lo, hi));
        }
        let splits = self.splits(&ranges);

        let ub_total = self.upper_bound(node.interval, &node.residual, &jobs);
        let mut best: Option<Sol> = None;
        'search: for mid in &middles {
            let res_l = mid.residual.restrict(li).expect("child inside parent");
            let res_r = mid.residual.restrict(ri).expect("child inside parent");
            let bound = mid.profit
                + left_jobs
                    .iter()
                    .filter(|j| self.fits_somewhere(j, li, &res_l) || self.fits_somewhere(j, ri, &res_r))
                    .map(|j| self.weight_of(j))
                    .sum::<i128>()
                + self.upper_bound(ri, &res_r, &right_jobs);
            for batch in &batches {
                for split in &splits {
                    if let Some(b) = &best {
                        if bound <= b.value {
                            continue 'search;
                        }
                    }
                    self.stats.candidates += 1;
                    let mut left_roles = vec![];
                    let mut right_roles = vec![];
                    for (i, (slot, n)) in node.boxes.iter().enumerate() {
                        if split[i] > 0 {
                            left_roles.push((*slot, split[i]));
                        }
                        if n - split[i] > 0 {
                            right_roles.push((*slot, n - split[i]));
                        }
                    }
                    let inherited_left = left_roles.len();
                    left_roles.extend(mid.boxes.iter().copied());
                    left_roles.extend(batch.boxes.iter().copied());
                    let left_boxes = ChildBoxes::new(left_roles);
                    let right_boxes = ChildBoxes::new(right_roles);
                    if !self.fillable(&left_boxes.sorted, &left_jobs) {
                        continue;
                    }
                    let right_arts_all = merge_counts(right_arts.iter().copied().chain(batch.arts.iter().copied()));
                    let new_right_jobs = self.jobs(&right_reals, &right_arts_all);
                    if !self.fillable(&right_boxes.sorted, &new_right_jobs) {
                        continue;
                    }
                    let left_node = Node {
                        interval: li,
                        residual: res_l.clone(),
                        reals: left_reals.clone(),
                        arts: left_arts.clone(),
                        boxes: left_boxes.sorted.clone(),
                        root: false,
                    };
                    let Some(l) = self.solve(left_node) else { continue };
                    let right_node = Node {
                        interval: ri,
                        residual: res_r.clone(),
                        reals: right_reals.clone(),
                        arts: right_arts_all,
                        boxes: right_boxes.sorted.clone(),
                        root: false,
                    };
                    let Some(r) = self.solve(right_node) else { continue };
                    let Some(cand) =
                        self.combine(node, depth, ri, split, inherited_left, &left_boxes, &right_boxes, mid, batch, &l, &r)
                    else {
                        continue;
                    };
                    if best.as_ref().map_or(true, |b| cand.value > b.value) {
                        debug_assert!(self.respects(node, &cand.placed), "candidate overloads the residual");
                        if let Some(trace) = self.trace.as_mut() {
                            trace.push(format!(
                                "candidate interval=[{},{}] level={} objective={}",
                                node.interval.lo,
                                node.interval.hi,
                                depth,
                                format_rational(&Rational::new(cand.value.into(), self.scale.clone()))
                            ));
                        }
                        let done = cand.value >= ub_total;
                        best = Some(cand);
                        if done {
                            break 'search;
                        }
                    }
                }
            }
        }
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn combine(
        &self,
        node: &Node,
        depth: i32,
        ri: EdgeRange,
        split: &[u32],
        inherited_left: usize,
        left_boxes: &ChildBoxes,
        right_boxes: &ChildBoxes,
        mid: &Middle,
        batch: &Batch,
        l: &Sol,
        r: &Sol,
    ) -> Option<Sol> {
        let mut fills = Vec::with_capacity(node.boxes.len());
        let (mut li_role, mut ri_role) = (0, 0);
        for (i, (_, n)) in node.boxes.iter().enumerate() {
            let mut f = vec![];
            if split[i] > 0 {
                f.extend(l.fills[left_boxes.position[li_role]].iter().copied());
                li_role += 1;
            }
            if n - split[i] > 0 {
                f.extend(r.fills[right_boxes.position[ri_role]].iter().copied());
                ri_role += 1;
            }
            fills.push(f);
        }
        let mut placed = l.placed.clone();
        for (b, (slot, _)) in mid.boxes.iter().enumerate() {
            for j in &l.fills[left_boxes.position[inherited_left + b]] {
                let room = self.window_of(j).intersect(&slot.path)?;
                placed.push((*j, room.leftmost_fit(self.len_of(j))?));
            }
        }
        let first_batch = inherited_left + mid.boxes.len();
        let fillers: Vec<Job> = (0..batch.boxes.len())
            .flat_map(|b| l.fills[left_boxes.position[first_batch + b]].iter().copied())
            .collect();
        let mut arts = vec![];
        for (j, s) in &r.placed {
            match j {
                Job::Art(k, _) if k.depth == depth && k.window == ri => arts.push((*k, *s)),
                _ => placed.push((*j, *s)),
            }
        }
        if !arts.is_empty() {
            let assign = b_matching(&vec![1; arts.len()], fillers.len(), |a, f| {
                let (k, s) = &arts[a];
                let f = &fillers[f];
                self.class_of(f) == k.class
                    && EdgeRange::from_start(*s, k.length).overlap_len(&self.window_of(f)) >= self.len_of(f)
            })?;
            for (a, fs) in assign.iter().enumerate() {
                let f = fillers[fs[0]];
                let (k, s) = &arts[a];
                let room = EdgeRange::from_start(*s, k.length).intersect(&self.window_of(&f))?;
                placed.push((f, room.leftmost_fit(self.len_of(&f))?));
            }
        }
        Some(Sol {
            value: l.value + mid.profit + r.value,
            placed,
            fills,
        })
    }

    fn respects(&self, node: &Node, placed: &[(Job, Edge)]) -> bool {
        let load = reservation_profile(
            node.interval,
            placed
                .iter()
                .map(|(j, s)| (EdgeRange::from_start(*s, self.len_of(j)), self.demand_of(j))),
        );
        placed.iter().all(|(j, s)| {
            let p = EdgeRange::from_start(*s, self.len_of(j));
            node.interval.contains_range(&p) && self.window_of(j).contains_range(&p)
        }) && load.dominates(&node.residual).unwrap_or(false)
    }

    fn splits(&self, ranges: &[(u32, u32)]) -> Vec<Vec<u32>> {
        let cap = self.budget.cap(self.budget.splits);
        let mut out = vec![];
        let mut cur: Vec<u32> = ranges.iter().map(|r| r.0).collect();
        loop {
            out.push(cur.clone());
            if out.len() >= cap {
                break;
            }
            let mut i = 0;
            while i < ranges.len() {
                if cur[i] < ranges[i].1 {
                    cur[i] += 1;
                    break;
                }
                cur[i] = ranges[i].0;
                i += 1;
            }
            if i == ranges.len() {
                break;
            }
        }
        out
    }

    // --- boxes crossing the middle -------------------------------------

    fn middle_guesses(&mut self, node: &Node, li: EdgeRange, depth: i32, by_class: &BTreeMap<u32, Vec<Job>>) -> Vec<Middle> {
        let iv = node.interval;
        let caps: Vec<u64> = (iv.lo..=iv.hi).map(|e| node.residual.value_at(e)).collect();
        let per_class: Vec<(u32, Vec<Vec<(EdgeRange, u32)>>)> = by_class
            .iter()
            .map(|(&c, cands)| (c, self.middle_options(node, li, c, cands, depth, &caps)))
            .collect();
        let mut out = vec![];
        let mut load = vec![0u64; caps.len()];
        let mut chosen: Vec<(BoxSlot, u32)> = vec![];
        self.product_middles(node, depth, &per_class, 0, &caps, &mut load, &mut chosen, 0, &mut out);
        out.sort_by(|a, b| b.profit.cmp(&a.profit));
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn product_middles(
        &self,
        node: &Node,
        depth: i32,
        per_class: &[(u32, Vec<Vec<(EdgeRange, u32)>>)],
        i: usize,
        caps: &[u64],
        load: &mut Vec<u64>,
        chosen: &mut Vec<(BoxSlot, u32)>,
        profit: i128,
        out: &mut Vec<Middle>,
    ) {
        if i == per_class.len() {
            let residual = CapacityProfile::from_values(
                node.interval,
                &caps.iter().zip(load.iter()).map(|(c, l)| c - l).collect::<Vec<_>>(),
            );
            out.push(Middle {
                boxes: merge_counts(chosen.iter().copied()),
                profit,
                residual,
            });
            return;
        }
        let (class, options) = &per_class[i];
        let d = self.classes[*class as usize].demand;
        let w = self.classes[*class as usize].w;
        for opt in options {
            if !add_heights(load, caps, node.interval.lo, opt, d) {
                continue;
            }
            let n: u32 = opt.iter().map(|(_, c)| c).sum();
            let before = chosen.len();
            chosen.extend(opt.iter().map(|(p, c)| (BoxSlot { path: *p, class: *class, depth }, *c)));
            self.product_middles(node, depth, per_class, i + 1, caps, load, chosen, profit + w * n as i128, out);
            chosen.truncate(before);
            remove_heights(load, node.interval.lo, opt, d);
        }
    }

    /// Box sets for one class: the empty set, multisets of exact placement
    /// paths of at most `k^2` boxes, and grouped shapes for larger counts.
    fn middle_options(
        &self,
        node: &Node,
        li: EdgeRange,
        class: u32,
        cands: &[Job],
        depth: i32,
        caps: &[u64],
    ) -> Vec<Vec<(EdgeRange, u32)>> {
        let iv = node.interval;
        let h = li.hi;
        let d = self.classes[class as usize].demand;
        let mut paths: BTreeSet<EdgeRange> = BTreeSet::new();
        for j in cands {
            let Some(win) = self.window_of(j).intersect(&iv) else { continue };
            let len = self.len_of(j);
            if len < 2 || win.len() < len {
                continue;
            }
            let first = win.lo.max((h + 1).saturating_sub(len - 1));
            let last = h.min(win.hi + 1 - len);
            for s in first..=last {
                let p = EdgeRange::from_start(s, len);
                if node.residual.fits(p, d) {
                    paths.insert(p);
                }
            }
        }
        let mut paths: Vec<EdgeRange> = paths.into_iter().collect();
        if !self.budget.exhaustive {
            let aligned = |p: &EdgeRange| {
                cands.iter().any(|j| {
                    let w = self.window_of(j);
                    w.lo.max(iv.lo) == p.lo || w.hi.min(iv.hi) == p.hi
                })
            };
            paths.sort_by_key(|p| (!aligned(p), *p));
            paths.truncate(self.budget.box_paths);
        }
        let mid_room = caps[(h - iv.lo) as usize].min(caps[(h + 1 - iv.lo) as usize]) / d;
        let limit = self.budget.cap(self.budget.box_sets);
        let mut found: BTreeSet<Vec<(EdgeRange, u32)>> = BTreeSet::new();
        found.insert(vec![]);
        let kk = self.k * self.k;
        let slot = |p: EdgeRange| BoxSlot { path: p, class, depth };
        let hall = |set: &[(EdgeRange, u32)]| {
            let boxes: Vec<(BoxSlot, u32)> = set.iter().map(|(p, c)| (slot(*p), *c)).collect();
            self.fillable(&boxes, cands)
        };

        let exact_max = (cands.len() as u64).min(kk as u64).min(mid_room) as u32;
        let mut load = vec![0u64; caps.len()];
        let mut cur: Vec<(EdgeRange, u32)> = vec![];
        exact_sets(&paths, 0, exact_max, d, iv.lo, caps, &mut load, &mut cur, &hall, &mut found, limit);

        let n_max = (cands.len() as u64).min(mid_room) as usize;
        if n_max > kk && found.len() < limit {
            let starts: Vec<Edge> = paths.iter().map(|p| p.lo).collect::<BTreeSet<_>>().into_iter().collect();
            let ends: Vec<Edge> = paths.iter().map(|p| p.hi).collect::<BTreeSet<_>>().into_iter().collect();
            for n in kk + 1..=n_max {
                let outer = split_sizes(n, self.k);
                let shape: Vec<Vec<u32>> = outer[1..]
                    .iter()
                    .map(|&s| split_sizes(s, self.k)[1..].iter().map(|&x| x as u32).collect())
                    .collect();
                let mut g = Grouped {
                    shape: &shape,
                    starts: &starts,
                    ends: &ends,
                    d,
                    base: iv.lo,
                    caps,
                    load: vec![0; caps.len()],
                    cur: vec![],
                };
                g.run(0, 0, &hall, &mut found, limit);
                if found.len() >= limit {
                    break;
                }
            }
        }
        found.into_iter().collect()
    }

    // --- placeholders for tasks right of the middle ---------------------

    fn batch_guesses(
        &self,
        node: &Node,
        li: EdgeRange,
        ri: EdgeRange,
        depth: i32,
        by_class: &BTreeMap<u32, Vec<Job>>,
    ) -> Vec<Batch> {
        let mut per_class: Vec<Vec<Batch>> = vec![];
        for (&class, cands) in by_class {
            let reaching: Vec<Job> = cands
                .iter()
                .copied()
                .filter(|j| {
                    let w = self.window_of(j);
                    w.intersects(&li) && w.contains_range(&ri)
                })
                .collect();
            if reaching.is_empty() {
                continue;
            }
            let opts = self.batch_options(node, ri, class, &reaching, depth);
            if opts.len() > 1 {
                per_class.push(opts);
            }
        }
        let mut out = vec![Batch::default()];
        for opts in per_class {
            let mut next = Vec::with_capacity(out.len() * opts.len());
            for base in &out {
                for o in &opts {
                    let mut b = base.clone();
                    b.arts.extend(o.arts.iter().copied());
                    b.boxes.extend(o.boxes.iter().copied());
                    next.push(b);
                }
            }
            out = next;
        }
        for b in &mut out {
            b.arts.sort();
            b.boxes.sort();
        }
        out
    }

    fn batch_options(&self, node: &Node, ri: EdgeRange, class: u32, reaching: &[Job], depth: i32) -> Vec<Batch> {
        let d = self.classes[class as usize].demand;
        let mut lengths: Vec<u64> = reaching
            .iter()
            .map(|j| self.len_of(j))
            .filter(|&p| p <= ri.len() && node.residual.first_fit(ri, p, d).is_some())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        lengths.reverse();
        let n = reaching.len();
        let limit = self.budget.cap(self.budget.length_profiles);
        let mut found: BTreeSet<Vec<(u64, u32)>> = BTreeSet::new();
        found.insert(vec![]);
        let make = |profile: &[(u64, u32)]| -> Batch {
            let arts = profile
                .iter()
                .map(|&(p, c)| {
                    (
                        ArtKind {
                            class,
                            length: p,
                            window: ri,
                            depth,
                        },
                        c,
                    )
                })
                .collect();
            let boxes = profile
                .iter()
                .map(|&(p, c)| {
                    (
                        BoxSlot {
                            path: EdgeRange::new(ri.hi + 1 - p, ri.hi),
                            class,
                            depth,
                        },
                        c,
                    )
                })
                .collect();
            Batch { arts, boxes }
        };
        let ok = |profile: &[(u64, u32)]| self.fillable(&make(profile).boxes, reaching);

        // One placeholder per task for up to k tasks.
        let mut cur: Vec<(u64, u32)> = vec![];
        copy_profiles(&lengths, 0, n.min(self.k) as u32, &mut cur, &ok, &mut found, limit);

        // Harmonic shapes: the smallest group is dropped, the others get
        // nonincreasing lengths.
        for total in self.k + 1..=n {
            if found.len() >= limit {
                break;
            }
            let sizes = split_sizes_ascending(total, self.k);
            let groups: Vec<u32> = sizes[1..].iter().map(|&s| s as u32).collect();
            let mut picks = vec![];
            harmonic_profiles(&lengths, &groups, 0, 0, &mut picks, &ok, &mut found, limit);
        }
        found.iter().map(|p| make(p)).collect()
    }
}

fn add_heights(load: &mut [u64], caps: &[u64], base: Edge, set: &[(EdgeRange, u32)], d: u64) -> bool {
    for (i, (p, c)) in set.iter().enumerate() {
        let h = d * *c as u64;
        if (p.lo..=p.hi).any(|e| load[(e - base) as usize] + h > caps[(e - base) as usize]) {
            remove_heights(load, base, &set[..i], d);
            return false;
        }
        for e in p.lo..=p.hi {
            load[(e - base) as usize] += h;
        }
    }
    true
}

fn remove_heights(load: &mut [u64], base: Edge, set: &[(EdgeRange, u32)], d: u64) {
    for (p, c) in set {
        for e in p.lo..=p.hi {
            load[(e - base) as usize] -= d * *c as u64;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn exact_sets(
    paths: &[EdgeRange],
    i: usize,
    room: u32,
    d: u64,
    base: Edge,
    caps: &[u64],
    load: &mut Vec<u64>,
    cur: &mut Vec<(EdgeRange, u32)>,
    hall: &dyn Fn(&[(EdgeRange, u32)]) -> bool,
    found: &mut BTreeSet<Vec<(EdgeRange, u32)>>,
    limit: usize,
) {
    if i == paths.len() || room == 0 || found.len() >= limit {
        return;
    }
    exact_sets(paths, i + 1, room, d, base, caps, load, cur, hall, found, limit);
    for c in 1..=room {
        let one = [(paths[i], c)];
        if !add_heights(load, caps, base, &one, d) {
            break;
        }
        cur.push((paths[i], c));
        let feasible = hall(cur);
        if feasible && found.len() < limit {
            found.insert(cur.clone());
            exact_sets(paths, i + 1, room - c, d, base, caps, load, cur, hall, found, limit);
        }
        cur.pop();
        remove_heights(load, base, &one, d);
        if !feasible {
            break;
        }
    }
}

/// Grouped middle boxes: per outer group `r >= 2` a common left end, per
/// inner group `q >= 2` a right end, left ends nondecreasing in `r` and
/// right ends nonincreasing in `q`.
struct Grouped<'s> {
    shape: &'s [Vec<u32>],
    starts: &'s [Edge],
    ends: &'s [Edge],
    d: u64,
    base: Edge,
    caps: &'s [u64],
    load: Vec<u64>,
    cur: Vec<(EdgeRange, u32)>,
}

impl Grouped<'_> {
    fn run(
        &mut self,
        r: usize,
        min_start: usize,
        hall: &dyn Fn(&[(EdgeRange, u32)]) -> bool,
        found: &mut BTreeSet<Vec<(EdgeRange, u32)>>,
        limit: usize,
    ) {
        if found.len() >= limit {
            return;
        }
        if r == self.shape.len() {
            let merged = merge_counts(self.cur.iter().copied());
            if !merged.is_empty() && hall(&merged) {
                found.insert(merged);
            }
            return;
        }
        for si in min_start..self.starts.len() {
            self.pick_end(r, si, 0, self.ends.len(), hall, found, limit);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn pick_end(
        &mut self,
        r: usize,
        si: usize,
        q: usize,
        max_end: usize,
        hall: &dyn Fn(&[(EdgeRange, u32)]) -> bool,
        found: &mut BTreeSet<Vec<(EdgeRange, u32)>>,
        limit: usize,
    ) {
        if q == self.shape[r].len() {
            self.run(r + 1, si, hall, found, limit);
            return;
        }
        let count = self.shape[r][q];
        if count == 0 {
            self.pick_end(r, si, q + 1, max_end, hall, found, limit);
            return;
        }
        for ei in (0..max_end).rev() {
            let p = EdgeRange::new(self.starts[si], self.ends[ei]);
            let one = [(p, count)];
            if !add_heights(&mut self.load, self.caps, self.base, &one, self.d) {
                continue;
            }
            self.cur.push((p, count));
            if hall(&merge_counts(self.cur.iter().copied())) {
                self.pick_end(r, si, q + 1, ei + 1, hall, found, limit);
            }
            self.cur.pop();
            remove_heights(&mut self.load, self.base, &one, self.d);
            if found.len() >= limit {
                return;
            }
        }
    }
}

fn copy_profiles(
    lengths: &[u64],
    i: usize,
    room: u32,
    cur: &mut Vec<(u64, u32)>,
    ok: &dyn Fn(&[(u64, u32)]) -> bool,
    found: &mut BTreeSet<Vec<(u64, u32)>>,
    limit: usize,
) {
    if i == lengths.len() || room == 0 || found.len() >= limit {
        return;
    }
    copy_profiles(lengths, i + 1, room, cur, ok, found, limit);
    for c in 1..=room {
        cur.push((lengths[i], c));
        let feasible = ok(cur);
        if feasible && found.len() < limit {
            found.insert(cur.clone());
            copy_profiles(lengths, i + 1, room - c, cur, ok, found, limit);
        }
        cur.pop();
        if !feasible {
            break;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn harmonic_profiles(
    lengths: &[u64],
    groups: &[u32],
    r: usize,
    from: usize,
    picks: &mut Vec<(u64, u32)>,
    ok: &dyn Fn(&[(u64, u32)]) -> bool,
    found: &mut BTreeSet<Vec<(u64, u32)>>,
    limit: usize,
) {
    if found.len() >= limit {
        return;
    }
    if r == groups.len() {
        let merged = merge_counts(picks.iter().copied());
        if ok(&merged) {
            found.insert(merged);
        }
        return;
    }
    for li in from..lengths.len() {
        picks.push((lengths[li], groups[r]));
        if ok(&merge_counts(picks.iter().copied())) {
            harmonic_profiles(lengths, groups, r + 1, li, picks, ok, found, limit);
        }
        picks.pop();
    }
}

// ---------------------------------------------------------------------------
// Public entry points.

fn weight_of_value(value: i128, scale: &BigInt) -> Rational {
    Rational::new(value.into(), scale.clone())
}

/// Exact optimum of a single-edge subproblem; `None` when the inherited
/// boxes cannot be filled.
pub fn solve_base(sub: &Subproblem) -> Result<Option<SubSolution>, ApproxError> {
    if sub.interval.len() != 1 {
        return Err(ApproxError::Malformed(format!("base case needs one edge, got {}", sub.interval)));
    }
    solve_subproblem(sub, Epsilon::reciprocal(1)?, &GuessBudget::exhaustive())
}

/// Best candidate over all enumerated guesses; `None` when every branch was
/// discarded.
pub fn solve_subproblem(
    sub: &Subproblem,
    eps: Epsilon,
    budget: &GuessBudget,
) -> Result<Option<SubSolution>, ApproxError> {
    if sub.residual.span() != sub.interval {
        return Err(ApproxError::Malformed("residual must span the interval".into()));
    }
    if sub.interval.len() != 1 && sub.tree.interval_at(sub.tree.level(sub.interval), sub.interval.lo) != sub.interval {
        return Err(ApproxError::Malformed(format!("{} is not a tree interval", sub.interval)));
    }
    let reals: Vec<Task> = sub.task_pool.iter().filter(|t| !t.artificial).cloned().collect();
    let art_tasks: Vec<&Task> = sub.task_pool.iter().filter(|t| t.artificial).collect();
    let extra: Vec<(Rational, u64)> = art_tasks
        .iter()
        .map(|t| (t.weight.clone(), t.demand))
        .chain(sub.boxes.iter().map(|b| (b.task_box.weight.clone(), b.task_box.demand)))
        .collect();
    let (mut solver, index) = Solver::new(&reals, &extra, sub.tree, eps, *budget, false)?;
    let mut art_ids: BTreeMap<ArtKind, Vec<&Task>> = BTreeMap::new();
    for t in &art_tasks {
        let kind = ArtKind {
            class: index[&(t.weight.clone(), t.demand)],
            length: t.length,
            window: t.window,
            depth: INPUT_ART_DEPTH,
        };
        art_ids.entry(kind).or_default().push(t);
    }
    let slot_of = |b: &BoxedGuess| BoxSlot {
        path: b.task_box.path,
        class: index[&(b.task_box.weight.clone(), b.task_box.demand)],
        depth: INPUT_BOX_DEPTH,
    };
    let boxes = merge_counts(sub.boxes.iter().map(|b| (slot_of(b), b.count as u32)));
    let node = Node {
        interval: sub.interval,
        residual: sub.residual.clone(),
        reals: (0..reals.len() as u32).collect(),
        arts: art_ids.iter().map(|(k, v)| (*k, v.len() as u32)).collect(),
        boxes: boxes.clone(),
        root: false,
    };
    let Some(sol) = solver.solve(node) else { return Ok(None) };
    let task_of = |j: &Job| -> Task {
        match j {
            Job::Real(i) => reals[*i as usize].clone(),
            Job::Art(k, c) => art_ids[k][*c as usize].clone(),
        }
    };
    let mut pending: Vec<std::vec::IntoIter<Job>> = sol.fills.iter().map(|f| f.clone().into_iter()).collect();
    let box_fills = sub
        .boxes
        .iter()
        .map(|b| {
            if b.count == 0 {
                return vec![];
            }
            let at = boxes.binary_search_by_key(&slot_of(b), |(s, _)| *s).expect("merged slot");
            pending[at].by_ref().take(b.count as usize).map(|j| task_of(&j)).collect()
        })
        .collect();
    Ok(Some(SubSolution {
        placed: sol.placed.iter().map(|(j, s)| (task_of(j), *s)).collect(),
        box_fills,
        objective: weight_of_value(sol.value, &solver.scale),
    }))
}

/// What the parent guessed when producing the two child results.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombineContext {
    /// The parent's interval.
    pub interval: EdgeRange,
    /// Leading entries of both children's `box_fills` that belong to the
    /// parent's own boxes, in the parent's order. A box absent from one side
    /// still has an (empty) entry there.
    pub inherited: usize,
    /// Boxes crossing the middle; their fills follow the inherited ones in
    /// the left result.
    pub middle: Vec<BoxedGuess>,
    /// Placeholders handed to the right child and the boxes whose fills,
    /// following the middle ones in the left result, replace them.
    pub batch: ArtificialBatch,
}

/// Merges two child results into a result for the parent; `None` when no
/// replacement for the scheduled placeholders exists.
pub fn combine(left: &SubSolution, right: &SubSolution, ctx: &CombineContext) -> Option<SubSolution> {
    let tree = IntervalTree::new(ctx.interval.hi);
    let (_, ri) = tree.children(ctx.interval)?;
    let k = ctx.inherited;
    if left.box_fills.len() != k + ctx.middle.len() + ctx.batch.boxes.len() || right.box_fills.len() < k {
        return None;
    }
    let mut placed = left.placed.clone();
    let mut objective = &left.objective + &right.objective;
    for (b, fill) in ctx.middle.iter().zip(&left.box_fills[k..]) {
        for t in fill {
            placed.push((t.clone(), b.task_box.leftmost_start(t)?));
        }
        objective += &b.task_box.weight * Rational::from_integer(b.count.into());
    }
    let batch_ids: BTreeSet<TaskId> = ctx.batch.tasks.iter().map(|t| t.id).collect();
    let (arts, rest): (Vec<(Task, Edge)>, Vec<(Task, Edge)>) =
        right.placed.iter().cloned().partition(|(t, _)| batch_ids.contains(&t.id));
    placed.extend(rest);
    let fills: Vec<(BoxedGuess, Vec<Task>)> = ctx
        .batch
        .boxes
        .iter()
        .cloned()
        .zip(left.box_fills[k + ctx.middle.len()..].iter().cloned())
        .collect();
    if !arts.is_empty() {
        let map = crate::grouping::replacement_map(&arts, &fills, ri.lo)?;
        let fillers: BTreeMap<TaskId, &Task> = fills.iter().flat_map(|(_, q)| q.iter().map(|t| (t.id, t))).collect();
        for (art, s) in &arts {
            let f = fillers[&map[&art.id]];
            let room = art.path(*s).intersect(&f.window)?;
            placed.push((f.clone(), room.leftmost_fit(f.length)?));
        }
    }
    let box_fills = (0..k)
        .map(|i| left.box_fills[i].iter().chain(right.box_fills[i].iter()).cloned().collect())
        .collect();
    Some(SubSolution {
        placed,
        box_fills,
        objective,
    })
}

/// Result of one root solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootOutcome {
    /// Schedule in the ids of the normalized instance's origin.
    pub schedule: Schedule,
    pub objective: Rational,
    pub mirrored: bool,
    pub stats: SolveStats,
    pub trace: Vec<String>,
}

fn solve_oriented(
    inst: &Instance,
    eps: Epsilon,
    budget: &GuessBudget,
    tracing: bool,
) -> Result<(Schedule, Rational, SolveStats, Vec<String>), ApproxError> {
    let tree = IntervalTree::new(inst.m);
    let (mut solver, _) = Solver::new(&inst.tasks, &[], tree, eps, *budget, tracing)?;
    let residual = inst.capacities.extend_right(tree.size(), 0);
    let node = Node {
        interval: tree.root(),
        residual,
        reals: (0..inst.n() as u32).collect(),
        arts: vec![],
        boxes: vec![],
        root: true,
    };
    let sol = solver.solve(node);
    let mut sched = Schedule::new();
    let mut value = 0i128;
    if let Some(sol) = sol {
        for (j, s) in &sol.placed {
            if let Job::Real(i) = j {
                sched.insert(inst.tasks[*i as usize].id, *s);
            }
        }
        value = sol.value;
    }
    let objective = weight_of_value(value, &solver.scale);
    debug_assert_eq!(solution_weight(inst, &sched).ok(), Some(objective.clone()));
    Ok((sched, objective, solver.stats, solver.trace.unwrap_or_default()))
}

/// Solves the instance and its mirror image and keeps the better schedule
/// (ties keep the unmirrored one).
pub fn solve_root_traced(
    norm: &NormalizedInstance,
    budget: &GuessBudget,
    tracing: bool,
) -> Result<RootOutcome, ApproxError> {
    let eps = norm.epsilon;
    let inst = &norm.inst;
    let (direct, direct_w, mut stats, mut trace) = solve_oriented(inst, eps, budget, tracing)?;
    let mirror = inst.reflect();
    let (flipped, flipped_w, mstats, mtrace) = solve_oriented(&mirror, eps, budget, tracing)?;
    stats.absorb(&mstats);
    trace.extend(mtrace);
    let (sched, objective, mirrored) = if flipped_w > direct_w {
        (flipped.reflect(&mirror)?, flipped_w, true)
    } else {
        (direct, direct_w, false)
    };
    if !check_schedule(inst, &sched, &Rational::from_integer(1.into()))?.feasible {
        return Err(ApproxError::Malformed("root schedule overloads an edge".into()));
    }
    Ok(RootOutcome {
        schedule: norm.map_back(&sched),
        objective,
        mirrored,
        stats,
        trace,
    })
}

pub fn solve_root(norm: &NormalizedInstance, budget: &GuessBudget) -> Result<Schedule, ApproxError> {
    Ok(solve_root_traced(norm, budget, false)?.schedule)
}

/// One preprocessed branch and the schedule found for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchResult {
    pub token: RecombinationToken,
    pub normalized: NormalizedInstance,
    pub schedule: Schedule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproxOutcome {
    pub schedule: Schedule,
    pub objective: Rational,
    /// Factor by which original capacities may be exceeded.
    pub augmentation: Rational,
    pub branches: Vec<BranchResult>,
    pub stats: SolveStats,
    /// Candidate lines of every solved branch, empty unless traced.
    pub trace: Vec<String>,
}

/// Preprocesses, solves every branch (identical branches once), and
/// recombines into a schedule of the original instance.
pub fn solve_approx(inst: &Instance, eps: Epsilon, budget: &GuessBudget) -> Result<ApproxOutcome, ApproxError> {
    solve_approx_traced(inst, eps, budget, false)
}

pub fn solve_approx_traced(
    inst: &Instance,
    eps: Epsilon,
    budget: &GuessBudget,
    tracing: bool,
) -> Result<ApproxOutcome, ApproxError> {
    let mut trace = vec![];
    let mut cache: HashMap<(u64, CapacityProfile, Vec<Task>), Schedule> = HashMap::new();
    let mut branches = vec![];
    let mut stats = SolveStats::default();
    for (norm, token) in preprocess(inst, eps)? {
        let key = (norm.inst.m, norm.inst.capacities.clone(), norm.inst.tasks.clone());
        let schedule = match cache.get(&key) {
            Some(s) => s.clone(),
            None => {
                let out = solve_root_traced(&norm, budget, tracing)?;
                stats.absorb(&out.stats);
                trace.extend(out.trace);
                cache.insert(key, out.schedule.clone());
                out.schedule
            }
        };
        branches.push(BranchResult {
            token,
            normalized: norm,
            schedule,
        });
    }
    let pairs: Vec<(RecombinationToken, Schedule)> =
        branches.iter().map(|b| (b.token.clone(), b.schedule.clone())).collect();
    let schedule = recombine(inst, &pairs)?;
    Ok(ApproxOutcome {
        objective: solution_weight(inst, &schedule)?,
        schedule,
        augmentation: recombination_augmentation(eps),
        branches,
        stats,
        trace,
    })
}

/// Convenience for tests and tools: a subproblem box of the given class.
pub fn class_box(path: EdgeRange, demand: u64, weight: Rational, count: u64) -> BoxedGuess {
    BoxedGuess::new(
        TaskBox {
            path,
            height: demand * count,
            demand,
            weight,
        },
        count,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{brute_force_left_constrained_opt, brute_force_opt, OracleLimits};
    use crate::numeric::int;
    use crate::reductions::pad_for_span;
    use proptest::prelude::*;

    fn eps(k: u64) -> Epsilon {
        Epsilon::reciprocal(k).unwrap()
    }

    fn uniform(m: u64, cap: u64, tasks: Vec<Task>) -> Instance {
        Instance::new(m, CapacityProfile::constant(EdgeRange::new(1, m), cap), tasks).unwrap()
    }

    fn wrap(inst: Instance, e: Epsilon) -> NormalizedInstance {
        NormalizedInstance {
            distinct_weights: inst.distinct_weights(),
            distinct_demands: inst.distinct_demands(),
            back_map: inst.tasks.iter().map(|t| (t.id, t.id)).collect(),
            inst,
            epsilon: e,
        }
    }

    fn root_value(inst: &Instance, e: Epsilon) -> Rational {
        let out = solve_root_traced(&wrap(inst.clone(), e), &GuessBudget::exhaustive(), false).unwrap();
        assert!(check_schedule(inst, &out.schedule, &int(1)).unwrap().feasible);
        assert_eq!(solution_weight(inst, &out.schedule).unwrap(), out.objective);
        out.objective
    }

    #[test]
    fn levels() {
        let tree = IntervalTree::new(8);
        let t = |lo, hi| Task::new(1, 1, int(1), 1, EdgeRange::new(lo, hi));
        assert_eq!(task_level(&t(1, 8), &tree), 0);
        assert_eq!(task_level(&t(3, 3), &tree), 3);
        assert_eq!(task_level(&t(4, 5), &tree), 0);
        assert_eq!(task_level(&t(5, 6), &tree), 2);
        assert_eq!(task_level(&t(5, 8), &tree), 1);
        assert_eq!(tree.interval_at(1, 6), EdgeRange::new(5, 8));
        assert_eq!(tree.mid(EdgeRange::new(5, 8)), Some(6));
        assert_eq!(IntervalTree::new(5).size(), 8);
        assert_eq!(IntervalTree::new(1).height(), 0);
    }

    #[test]
    fn left_constrained_examples() {
        let tree = IntervalTree::new(8);
        let a = Task::new(1, 1, int(1), 2, EdgeRange::new(1, 8));
        assert!(is_left_constrained(&tree, &[(a.clone(), 1), (a.clone(), 3)]));
        assert!(!is_left_constrained(&tree, &[(a.clone(), 5)]));
        assert!(is_left_constrained(&tree, &[(a.clone(), 4)]));
        let mut art = a.clone();
        art.artificial = true;
        assert!(is_left_constrained(&tree, &[(art, 7)]));
    }

    fn sub(m: u64, interval: EdgeRange, residual: &[u64], pool: Vec<Task>, boxes: Vec<BoxedGuess>) -> Subproblem {
        Subproblem {
            tree: IntervalTree::new(m),
            interval,
            residual: CapacityProfile::from_values(interval, residual),
            task_pool: pool,
            boxes,
        }
    }

    #[test]
    fn base_examples() {
        let e1 = EdgeRange::new(1, 1);
        let none = solve_base(&sub(1, e1, &[0], vec![], vec![])).unwrap().unwrap();
        assert_eq!(none.objective, int(0));
        assert!(none.placed.is_empty());

        let pool = vec![Task::new(1, 3, int(2), 1, e1), Task::new(2, 3, int(2), 1, e1)];
        let one = solve_base(&sub(1, e1, &[5], pool, vec![])).unwrap().unwrap();
        assert_eq!(one.placed.len(), 1);
        assert_eq!(one.objective, int(2));

        let b = class_box(e1, 1, int(1), 1);
        assert!(solve_base(&sub(1, e1, &[5], vec![], vec![b])).unwrap().is_none());
    }

    #[test]
    fn base_fills_boxes_before_scheduling() {
        let e1 = EdgeRange::new(1, 1);
        let pool = vec![Task::new(1, 1, int(4), 1, e1), Task::new(2, 1, int(4), 1, e1)];
        let b = class_box(EdgeRange::new(1, 2), 1, int(4), 1);
        let out = solve_base(&sub(2, e1, &[3], pool, vec![b])).unwrap().unwrap();
        assert_eq!(out.box_fills[0].len(), 1);
        assert_eq!(out.placed.len(), 1);
        assert_eq!(out.objective, int(4));
    }

    #[test]
    fn subproblem_examples() {
        let iv = EdgeRange::new(1, 4);
        let empty = solve_subproblem(&sub(4, iv, &[1; 4], vec![], vec![]), eps(2), &GuessBudget::default())
            .unwrap()
            .unwrap();
        assert_eq!(empty.objective, int(0));
        let t = Task::new(7, 1, int(3), 1, iv);
        let one = solve_subproblem(&sub(4, iv, &[2; 4], vec![t], vec![]), eps(2), &GuessBudget::default())
            .unwrap()
            .unwrap();
        assert_eq!(one.objective, int(3));
        assert_eq!(one.placed.len(), 1);
    }

    #[test]
    fn subproblem_with_input_placeholder_and_box() {
        // The placeholder may fill the input box, the real task is scheduled.
        let iv = EdgeRange::new(1, 2);
        let mut art = Task::new(9, 1, int(2), 1, iv);
        art.artificial = true;
        let real = Task::new(1, 1, int(2), 1, iv);
        let b = class_box(EdgeRange::new(1, 2), 1, int(2), 1);
        let out = solve_subproblem(&sub(2, iv, &[1, 0], vec![real, art], vec![b]), eps(2), &GuessBudget::default())
            .unwrap()
            .unwrap();
        assert_eq!(out.box_fills[0].len(), 1);
        assert_eq!(out.placed.len(), 1);
        assert_eq!(out.objective, int(2));
    }

    #[test]
    fn combine_examples() {
        let iv = EdgeRange::new(1, 4);
        let batch = ArtificialBatch {
            tasks: vec![],
            boxes: vec![],
            weight: int(1),
            demand: 1,
        };
        let ctx = CombineContext {
            interval: iv,
            inherited: 0,
            middle: vec![],
            batch,
        };
        let both = combine(&SubSolution::empty(0), &SubSolution::empty(0), &ctx).unwrap();
        assert!(both.placed.is_empty());
        assert_eq!(both.objective, int(0));

        let mut art = Task::new(100, 2, int(5), 2, EdgeRange::new(3, 4));
        art.artificial = true;
        let real = Task::new(1, 2, int(5), 2, EdgeRange::new(2, 4));
        let bx = class_box(EdgeRange::new(3, 4), 2, int(5), 1);
        let ctx = CombineContext {
            interval: iv,
            inherited: 0,
            middle: vec![],
            batch: ArtificialBatch {
                tasks: vec![art.clone()],
                boxes: vec![bx],
                weight: int(5),
                demand: 2,
            },
        };
        let left = SubSolution {
            placed: vec![],
            box_fills: vec![vec![real.clone()]],
            objective: int(0),
        };
        let right = SubSolution {
            placed: vec![(art.clone(), 3)],
            box_fills: vec![],
            objective: int(5),
        };
        let out = combine(&left, &right, &ctx).unwrap();
        assert_eq!(out.placed, vec![(real, 3)]);
        assert_eq!(out.objective, int(5));
        let before = reservation_profile(iv, [(art.path(3), 2)]);
        assert_eq!(placed_profile_of(iv, &out.placed), before);
    }

    fn placed_profile_of(iv: EdgeRange, placed: &[(Task, Edge)]) -> CapacityProfile {
        crate::grouping::placed_profile(iv, placed)
    }

    #[test]
    fn middle_box_fills_are_placed_leftmost() {
        let iv = EdgeRange::new(1, 4);
        let t = Task::new(1, 1, int(2), 2, EdgeRange::new(1, 4));
        let ctx = CombineContext {
            interval: iv,
            inherited: 0,
            middle: vec![class_box(EdgeRange::new(2, 3), 1, int(2), 1)],
            batch: ArtificialBatch {
                tasks: vec![],
                boxes: vec![],
                weight: int(2),
                demand: 1,
            },
        };
        let left = SubSolution {
            placed: vec![],
            box_fills: vec![vec![t.clone()]],
            objective: int(0),
        };
        let out = combine(&left, &SubSolution::empty(0), &ctx).unwrap();
        assert_eq!(out.placed, vec![(t, 2)]);
        assert_eq!(out.objective, int(2));
    }

    #[test]
    fn root_examples() {
        let zero = Instance::new(
            4,
            CapacityProfile::zero(EdgeRange::new(1, 4)),
            vec![Task::new(1, 1, int(1), 1, EdgeRange::new(1, 4))],
        )
        .unwrap();
        let out = solve_root_traced(&wrap(zero, eps(2)), &GuessBudget::default(), false).unwrap();
        assert!(out.schedule.is_empty());

        // A level-0 task that only fits right of the middle: the mirror finds it.
        let inst = Instance::new(
            4,
            CapacityProfile::from_values(EdgeRange::new(1, 4), &[0, 0, 1, 1]),
            vec![Task::new(1, 1, int(2), 2, EdgeRange::new(1, 4))],
        )
        .unwrap();
        assert_eq!(root_value(&inst, eps(2)), int(2));
    }

    #[test]
    fn recovers_left_constrained_optimum_with_one_middle_box() {
        let inst = uniform(
            4,
            2,
            vec![
                Task::new(1, 1, int(3), 2, EdgeRange::new(1, 4)),
                Task::new(2, 1, int(3), 2, EdgeRange::new(1, 4)),
                Task::new(3, 2, int(1), 1, EdgeRange::new(1, 1)),
            ],
        );
        let tree = IntervalTree::new(4);
        let (lc, _) = brute_force_left_constrained_opt(&inst, &tree, &OracleLimits::default()).unwrap();
        assert_eq!(root_value(&inst, eps(4)), lc);
    }

    #[test]
    fn trace_lines_are_well_formed() {
        let inst = uniform(2, 1, vec![Task::new(1, 1, int(1), 2, EdgeRange::new(1, 2))]);
        let out = solve_root_traced(&wrap(inst, eps(2)), &GuessBudget::default(), true).unwrap();
        assert!(!out.trace.is_empty());
        assert!(out.trace[0].starts_with("candidate interval=[1,2] level=0 objective="));
    }

    #[test]
    fn end_to_end_small() {
        let inst = uniform(
            4,
            3,
            vec![
                Task::new(1, 1, int(5), 2, EdgeRange::new(1, 4)),
                Task::new(2, 2, int(4), 3, EdgeRange::new(2, 4)),
                Task::new(3, 3, int(1), 1, EdgeRange::new(1, 2)),
            ],
        );
        let out = solve_approx(&inst, eps(2), &GuessBudget::default()).unwrap();
        assert!(check_schedule(&inst, &out.schedule, &out.augmentation).unwrap().feasible);
        for b in &out.branches {
            assert!(check_schedule(&b.normalized.inst, &b.schedule, &int(1)).unwrap().feasible);
        }
        let (opt, _) = brute_force_opt(&inst, &OracleLimits::default()).unwrap();
        assert!(out.objective * (int(2) + int(6) * eps(2).value() * int(2)) >= opt);
    }

    fn arb_instance(max_n: usize, max_m: u64) -> impl Strategy<Value = Instance> {
        (1..=max_m).prop_flat_map(move |m| {
            let task = (1u64..=3, 1u64..=4, 1..=m, 1..=m, 1..=m).prop_map(move |(d, w, a, b, p)| {
                let (lo, hi) = (a.min(b), a.max(b));
                (d, w, p.min(hi - lo + 1), lo, hi)
            });
            (
                prop::collection::vec(0u64..=4, m as usize),
                prop::collection::vec(task, 0..=max_n),
            )
                .prop_map(move |(caps, ts)| {
                    let tasks = ts
                        .into_iter()
                        .enumerate()
                        .map(|(i, (d, w, p, lo, hi))| Task::new(i as u64 + 1, d, int(w), p, EdgeRange::new(lo, hi)))
                        .collect();
                    Instance::new(m, CapacityProfile::from_values(EdgeRange::new(1, m), &caps), tasks).unwrap()
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn root_is_feasible_and_near_left_constrained(inst in arb_instance(5, 8)) {
            let tree = IntervalTree::new(inst.m);
            let limits = OracleLimits::default();
            let (lc, _) = brute_force_left_constrained_opt(&inst, &tree, &limits).unwrap();
            let (lc_m, _) = brute_force_left_constrained_opt(&inst.reflect(), &tree, &limits).unwrap();
            let e = eps(8);
            let got = root_value(&inst, e);
            let best = lc.max(lc_m);
            let factor = int(1) - int(6) * e.value() * int(tree.height() as u64);
            prop_assert!(got >= factor * best);
        }

        #[test]
        fn root_with_small_eps_matches_left_constrained_optimum(inst in arb_instance(4, 4)) {
            // With k >= n every guess is exact and nothing is lost.
            let tree = IntervalTree::new(inst.m);
            let limits = OracleLimits::default();
            let (lc, _) = brute_force_left_constrained_opt(&inst, &tree, &limits).unwrap();
            let (lc_m, _) = brute_force_left_constrained_opt(&inst.reflect(), &tree, &limits).unwrap();
            prop_assert!(root_value(&inst, eps(4)) >= lc.max(lc_m));
        }

        #[test]
        fn span_instances_reach_the_optimum_bound(inst in arb_instance(4, 4)) {
            let span = Instance::new(
                inst.m,
                inst.capacities.clone(),
                inst.tasks.iter().map(|t| Task { window: inst.path(), ..t.clone() }).collect(),
            ).unwrap();
            let padded = pad_for_span(&span).unwrap();
            let (opt, _) = brute_force_opt(&padded, &OracleLimits::default()).unwrap();
            let e = eps(4);
            let tree = IntervalTree::new(padded.m);
            let factor = int(1) - int(6) * e.value() * int(tree.height() as u64);
            prop_assert!(root_value(&padded, e) >= factor * opt);
        }

        #[test]
        fn larger_budget_never_hurts(inst in arb_instance(5, 8), width in 1usize..4) {
            let norm = wrap(inst.clone(), eps(2));
            let small = solve_root_traced(&norm, &GuessBudget::bounded(width), false).unwrap();
            let big = solve_root_traced(&norm, &GuessBudget::bounded(width + 1), false).unwrap();
            let full = solve_root_traced(&norm, &GuessBudget::exhaustive(), false).unwrap();
            prop_assert!(check_schedule(&inst, &small.schedule, &int(1)).unwrap().feasible);
            prop_assert!(big.objective >= small.objective);
            prop_assert!(full.objective >= big.objective);
        }

        #[test]
        fn right_placements_come_from_replacements(inst in arb_instance(5, 8)) {
            let norm = wrap(inst.clone(), eps(2));
            let out = solve_root_traced(&norm, &GuessBudget::default(), false).unwrap();
            let (target, sched) = if out.mirrored {
                let mirror = inst.reflect();
                let s = out.schedule.reflect(&inst).unwrap();
                (mirror, s)
            } else {
                (inst.clone(), out.schedule.clone())
            };
            let tree = IntervalTree::new(target.m);
            let index = target.index();
            // A placement inside the right child of its own level interval can
            // only come from a replacement, whose filler covers that child.
            for (id, s) in sched.iter() {
                let t = &target.tasks[index[&id]];
                if !tree.placement_left_constrained(t, s) {
                    let iv = tree.interval_at(task_level(t, &tree), t.window.lo);
                    let (_, right) = tree.children(iv).unwrap();
                    prop_assert!(t.window.contains_range(&right));
                }
            }
        }
    }
}
