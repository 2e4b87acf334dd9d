//! JSON encoding of instances, schedules and 3DM instances. Writers emit
//! one compact JSON value followed by a newline.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hardness::{HardnessError, ThreeDM};
use crate::instance::{Instance, InstanceError, Schedule, Task, TaskId};
use num_traits::ToPrimitive;

use crate::numeric::{format_rational, NumericError, Rational};
use crate::profile::{CapacityProfile, EdgeRange, ProfileError, Segment};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Hardness(#[from] HardnessError),
    #[error("empty edge range [{0}, {1}]")]
    EmptyRange(u64, u64),
    #[error("weight {0} is not a positive fraction with 128-bit parts")]
    Weight(String),
}

fn range(lo: u64, hi: u64) -> Result<EdgeRange, IoError> {
    EdgeRange::checked(lo, hi).ok_or(IoError::EmptyRange(lo, hi))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskRecord {
    id: u64,
    demand: u64,
    weight_num: u128,
    weight_den: u128,
    length: u64,
    window_lo: u64,
    window_hi: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceRecord {
    m: u64,
    /// `[first edge, last edge, capacity]` per segment.
    capacities: Vec<[u64; 3]>,
    tasks: Vec<TaskRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Placement {
    id: u64,
    start: u64,
}

fn line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("records always serialize");
    s.push('\n');
    s
}

fn weight_parts(w: &Rational) -> Result<(u128, u128), IoError> {
    match (w.numer().to_u128(), w.denom().to_u128()) {
        (Some(n), Some(d)) => Ok((n, d)),
        _ => Err(IoError::Weight(format_rational(w))),
    }
}

/// Fails only for weights whose numerator or denominator exceeds 128 bits.
pub fn instance_to_json(inst: &Instance) -> Result<String, IoError> {
    let rec = InstanceRecord {
        m: inst.m,
        capacities: inst
            .capacities
            .segments()
            .iter()
            .map(|s| [s.range.lo, s.range.hi, s.value])
            .collect(),
        tasks: inst
            .tasks
            .iter()
            .map(|t| {
                let (weight_num, weight_den) = weight_parts(&t.weight)?;
                Ok(TaskRecord {
                    id: t.id.0,
                    demand: t.demand,
                    weight_num,
                    weight_den,
                    length: t.length,
                    window_lo: t.window.lo,
                    window_hi: t.window.hi,
                })
            })
            .collect::<Result<_, IoError>>()?,
    };
    Ok(line(&rec))
}

pub fn instance_from_json(text: &str) -> Result<Instance, IoError> {
    let rec: InstanceRecord = serde_json::from_str(text)?;
    let segments: Vec<Segment> = rec
        .capacities
        .iter()
        .map(|&[lo, hi, value]| range(lo, hi).map(|range| Segment { range, value }))
        .collect::<Result<_, _>>()?;
    let span = range(1, rec.m)?;
    let capacities = CapacityProfile::from_segments(span, &segments)?;
    let mut tasks = Vec::with_capacity(rec.tasks.len());
    for t in rec.tasks {
        let window = range(t.window_lo, t.window_hi)?;
        if t.weight_den == 0 {
            return Err(IoError::Weight(format!("{}/0", t.weight_num)));
        }
        let weight = Rational::new(t.weight_num.into(), t.weight_den.into());
        tasks.push(Task::new(t.id, t.demand, weight, t.length, window));
    }
    Ok(Instance::new(rec.m, capacities, tasks)?)
}

pub fn schedule_to_json(sched: &Schedule) -> String {
    let recs: Vec<Placement> = sched.iter().map(|(id, start)| Placement { id: id.0, start }).collect();
    line(&recs)
}

pub fn schedule_from_json(text: &str) -> Result<Schedule, IoError> {
    let recs: Vec<Placement> = serde_json::from_str(text)?;
    Ok(recs.into_iter().map(|p| (TaskId(p.id), p.start)).collect())
}

pub fn three_dm_to_json(k: &ThreeDM) -> String {
    line(k)
}

pub fn three_dm_from_json(text: &str) -> Result<ThreeDM, IoError> {
    let k: ThreeDM = serde_json::from_str(text)?;
    k.validate()?;
    Ok(k)
}
