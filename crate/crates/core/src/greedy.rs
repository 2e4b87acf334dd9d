//! Baseline heuristic: heaviest task first, leftmost start that still fits.

use crate::instance::{Instance, Schedule, Task};

pub fn greedy_schedule(inst: &Instance) -> Schedule {
    let mut order: Vec<&Task> = inst.tasks.iter().collect();
    order.sort_by(|a, b| b.weight.cmp(&a.weight).then(a.id.cmp(&b.id)));
    let mut residual = inst.capacities.clone();
    let mut sched = Schedule::new();
    for t in order {
        if let Some(s) = residual.first_fit(t.window, t.length, t.demand) {
            residual = residual
                .subtract_on(t.path(s), t.demand)
                .expect("first_fit guarantees room");
            sched.insert(t.id, s);
        }
    }
    sched
}
