//! Instances, tasks, schedules and exact feasibility checks.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{format_rational, Rational};
use crate::profile::{reservation_profile, CapacityProfile, Edge, EdgeRange, ProfileError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TaskId(pub u64);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Task {
    pub id: TaskId,
    pub demand: u64,
    pub weight: Rational,
    pub length: u64,
    pub window: EdgeRange,
    /// Placeholder created during the recursion; never part of an answer.
    pub artificial: bool,
}

impl Task {
    pub fn new(id: u64, demand: u64, weight: Rational, length: u64, window: EdgeRange) -> Self {
        Self {
            id: TaskId(id),
            demand,
            weight,
            length,
            window,
            artificial: false,
        }
    }

    /// Path occupied when starting at `start`.
    pub fn path(&self, start: Edge) -> EdgeRange {
        EdgeRange::from_start(start, self.length)
    }

    /// Whether a start keeps the path inside the window.
    pub fn start_allowed(&self, start: Edge) -> bool {
        start >= self.window.lo && start + self.length - 1 <= self.window.hi
    }

    /// Every start inside the window intersected with `within`.
    pub fn starts_within(&self, within: EdgeRange) -> impl Iterator<Item = Edge> {
        let range = self.window.intersect(&within);
        let len = self.length;
        let (lo, hi) = match range {
            Some(r) if r.len() >= len => (r.lo, r.hi + 1 - len),
            _ => (1, 0),
        };
        lo..=hi
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub m: u64,
    pub capacities: CapacityProfile,
    pub tasks: Vec<Task>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ZeroEdges,
    CapacitySpan { expected: EdgeRange, got: EdgeRange },
    WindowOutsidePath { task: TaskId, window: EdgeRange },
    WindowShorterThanLength { task: TaskId, window: EdgeRange, length: u64 },
    NonpositiveDemand { task: TaskId },
    NonpositiveWeight { task: TaskId },
    NonpositiveLength { task: TaskId },
    DuplicateId { task: TaskId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroEdges => write!(f, "path has no edges"),
            Violation::CapacitySpan { expected, got } => {
                write!(f, "capacities cover {got}, expected {expected}")
            }
            Violation::WindowOutsidePath { task, window } => {
                write!(f, "task {task}: window {window} leaves the path")
            }
            Violation::WindowShorterThanLength { task, window, length } => {
                write!(f, "task {task}: window {window} shorter than length {length}")
            }
            Violation::NonpositiveDemand { task } => write!(f, "task {task}: nonpositive demand"),
            Violation::NonpositiveWeight { task } => write!(f, "task {task}: nonpositive weight"),
            Violation::NonpositiveLength { task } => write!(f, "task {task}: nonpositive length"),
            Violation::DuplicateId { task } => write!(f, "task {task}: duplicate id"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("invalid instance: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

/// Lists every broken invariant; an empty list means the instance is valid.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    if inst.m == 0 {
        out.push(Violation::ZeroEdges);
        return out;
    }
    let path = EdgeRange::new(1, inst.m);
    if inst.capacities.span() != path {
        out.push(Violation::CapacitySpan {
            expected: path,
            got: inst.capacities.span(),
        });
    }
    let mut seen = std::collections::BTreeSet::new();
    for t in &inst.tasks {
        if !seen.insert(t.id) {
            out.push(Violation::DuplicateId { task: t.id });
        }
        if t.window.lo < 1 || t.window.hi > inst.m || t.window.lo > t.window.hi {
            out.push(Violation::WindowOutsidePath {
                task: t.id,
                window: t.window,
            });
        }
        if t.length == 0 {
            out.push(Violation::NonpositiveLength { task: t.id });
        } else if t.window.lo <= t.window.hi && t.window.len() < t.length {
            out.push(Violation::WindowShorterThanLength {
                task: t.id,
                window: t.window,
                length: t.length,
            });
        }
        if t.demand == 0 {
            out.push(Violation::NonpositiveDemand { task: t.id });
        }
        if !t.weight.is_positive() {
            out.push(Violation::NonpositiveWeight { task: t.id });
        }
    }
    out
}

impl Instance {
    /// Validated constructor.
    pub fn new(m: u64, capacities: CapacityProfile, tasks: Vec<Task>) -> Result<Self, InstanceError> {
        let inst = Self { m, capacities, tasks };
        let v = validate_instance(&inst);
        if v.is_empty() {
            Ok(inst)
        } else {
            Err(InstanceError::Invalid(v))
        }
    }

    pub fn n(&self) -> usize {
        self.tasks.len()
    }

    pub fn path(&self) -> EdgeRange {
        EdgeRange::new(1, self.m)
    }

    pub fn max_capacity(&self) -> u64 {
        self.capacities.max_value()
    }

    pub fn task(&self, id: TaskId) -> Option<&Task> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn index(&self) -> BTreeMap<TaskId, usize> {
        self.tasks.iter().enumerate().map(|(i, t)| (t.id, i)).collect()
    }

    /// True when every window is the whole path.
    pub fn is_span(&self) -> bool {
        let path = self.path();
        self.tasks.iter().all(|t| t.window == path)
    }

    /// Left-right reflection `e -> m + 1 - e`.
    pub fn reflect(&self) -> Instance {
        Instance {
            m: self.m,
            capacities: self.capacities.reflect(self.m),
            tasks: self
                .tasks
                .iter()
                .map(|t| Task {
                    window: t.window.reflect(self.m),
                    ..t.clone()
                })
                .collect(),
        }
    }

    pub fn distinct_weights(&self) -> usize {
        let mut w: Vec<&Rational> = self.tasks.iter().map(|t| &t.weight).collect();
        w.sort();
        w.dedup();
        w.len()
    }

    pub fn distinct_demands(&self) -> usize {
        let mut d: Vec<u64> = self.tasks.iter().map(|t| t.demand).collect();
        d.sort_unstable();
        d.dedup();
        d.len()
    }
}

/// Start edge per scheduled task.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Schedule {
    pub placements: BTreeMap<TaskId, Edge>,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: TaskId, start: Edge) {
        self.placements.insert(id, start);
    }

    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    pub fn start(&self, id: TaskId) -> Option<Edge> {
        self.placements.get(&id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TaskId, Edge)> + '_ {
        self.placements.iter().map(|(&id, &s)| (id, s))
    }

    /// Maps a schedule of the reflected instance back.
    pub fn reflect(&self, inst: &Instance) -> Result<Schedule, ScheduleError> {
        let index = inst.index();
        let mut out = Schedule::new();
        for (id, s) in self.iter() {
            let t = &inst.tasks[*index.get(&id).ok_or(ScheduleError::UnknownTask(id))?];
            if s < 1 || s + t.length - 1 > inst.m {
                return Err(ScheduleError::BeyondPath { task: id, start: s });
            }
            out.insert(id, inst.m + 1 - (s + t.length - 1));
        }
        Ok(out)
    }

    pub fn union(&self, other: &Schedule) -> Schedule {
        let mut out = self.clone();
        out.placements.extend(other.iter());
        out
    }
}

impl FromIterator<(TaskId, Edge)> for Schedule {
    fn from_iter<I: IntoIterator<Item = (TaskId, Edge)>>(iter: I) -> Self {
        Self {
            placements: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("unknown task {0}")]
    UnknownTask(TaskId),
    #[error("task {task} starting at {start} leaves its window {window}")]
    OutsideWindow { task: TaskId, start: Edge, window: EdgeRange },
    #[error("task {task} starting at {start} runs past the last edge")]
    BeyondPath { task: TaskId, start: Edge },
    #[error("augmentation factor must be at least 1, got {0}")]
    BadAugmentation(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum OverloadRatio {
    Finite(Rational),
    Infinite,
}

impl OverloadRatio {
    pub fn at_most(&self, bound: &Rational) -> bool {
        match self {
            OverloadRatio::Finite(r) => r <= bound,
            OverloadRatio::Infinite => false,
        }
    }
}

impl fmt::Display for OverloadRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OverloadRatio::Finite(r) => f.write_str(&format_rational(r)),
            OverloadRatio::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// Largest `load / capacity` over all edges (`0/0 = 0`, `x/0 = inf`).
    pub max_overload_ratio: OverloadRatio,
    /// Edge attaining the ratio; `None` when nothing is loaded.
    pub worst_edge: Option<Edge>,
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "feasible={} max_overload_ratio={} worst_edge={}",
            self.feasible,
            self.max_overload_ratio,
            self.worst_edge.map_or("-".to_string(), |e| e.to_string())
        )
    }
}

/// Placed paths with demands, after checking ids and windows.
pub fn placed_paths(inst: &Instance, sched: &Schedule) -> Result<Vec<(EdgeRange, u64)>, ScheduleError> {
    let index = inst.index();
    let mut out = Vec::with_capacity(sched.len());
    for (id, start) in sched.iter() {
        let t = &inst.tasks[*index.get(&id).ok_or(ScheduleError::UnknownTask(id))?];
        if start < 1 || start + t.length - 1 > inst.m {
            return Err(ScheduleError::BeyondPath { task: id, start });
        }
        if !t.start_allowed(start) {
            return Err(ScheduleError::OutsideWindow {
                task: id,
                start,
                window: t.window,
            });
        }
        out.push((t.path(start), t.demand));
    }
    Ok(out)
}

/// Load profile of a schedule over the whole path.
pub fn load_profile(inst: &Instance, sched: &Schedule) -> Result<CapacityProfile, ScheduleError> {
    Ok(reservation_profile(inst.path(), placed_paths(inst, sched)?))
}

/// Checks `load(e) <= augmentation * u(e)` on every edge by a sweep over
/// breakpoints, so the cost does not depend on `m`.
pub fn check_schedule(
    inst: &Instance,
    sched: &Schedule,
    augmentation: &Rational,
) -> Result<FeasibilityReport, ScheduleError> {
    if augmentation < &Rational::one() {
        return Err(ScheduleError::BadAugmentation(format_rational(augmentation)));
    }
    let load = load_profile(inst, sched)?;
    ratio_report(&load, &inst.capacities, augmentation)
}

/// Same check against an arbitrary capacity profile.
pub fn ratio_report(
    load: &CapacityProfile,
    capacities: &CapacityProfile,
    augmentation: &Rational,
) -> Result<FeasibilityReport, ScheduleError> {
    let mut worst = OverloadRatio::Finite(Rational::zero());
    let mut worst_edge = None;
    for (range, l, u) in load.zip(capacities)? {
        if l == 0 {
            continue;
        }
        let r = if u == 0 {
            OverloadRatio::Infinite
        } else {
            OverloadRatio::Finite(Rational::new(l.into(), u.into()))
        };
        if worst_edge.is_none() || r > worst {
            worst = r;
            worst_edge = Some(range.lo);
        }
    }
    Ok(FeasibilityReport {
        feasible: worst.at_most(augmentation),
        max_overload_ratio: worst,
        worst_edge,
    })
}

/// Weight of the placed non-artificial tasks.
pub fn solution_weight(inst: &Instance, sched: &Schedule) -> Result<Rational, ScheduleError> {
    let index = inst.index();
    let mut total = Rational::zero();
    for (id, _) in sched.iter() {
        let t = &inst.tasks[*index.get(&id).ok_or(ScheduleError::UnknownTask(id))?];
        if !t.artificial {
            total += &t.weight;
        }
    }
    Ok(total)
}
