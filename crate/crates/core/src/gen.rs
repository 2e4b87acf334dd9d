//! Seeded instance generators. Every generator is a pure function of its
//! parameters and seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hardness::{HardnessError, ThreeDM};
use crate::instance::{Instance, Task};
use crate::numeric::rational;
use crate::profile::{CapacityProfile, EdgeRange};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomParams {
    pub n: usize,
    pub m: u64,
    pub max_demand: u64,
    pub max_capacity: u64,
    pub max_weight: u64,
    /// When set, half of the weights get denominator 2.
    pub fractional_weights: bool,
}

impl RandomParams {
    pub fn new(n: usize, m: u64) -> Self {
        Self {
            n,
            m,
            max_demand: 4,
            max_capacity: 6,
            max_weight: 10,
            fractional_weights: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowShape {
    /// Random window, random length inside it.
    Free,
    /// Window exactly as long as the task.
    Tight,
    /// Every window is the whole path.
    Span,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn capacities(r: &mut ChaCha8Rng, p: &RandomParams) -> CapacityProfile {
    let values: Vec<u64> = (0..p.m).map(|_| r.gen_range(0..=p.max_capacity)).collect();
    CapacityProfile::from_values(EdgeRange::new(1, p.m), &values)
}

fn task(r: &mut ChaCha8Rng, p: &RandomParams, id: u64, shape: WindowShape) -> Task {
    let demand = r.gen_range(1..=p.max_demand.max(1));
    let num = r.gen_range(1..=p.max_weight.max(1)) as i64;
    let den = if p.fractional_weights && r.gen_bool(0.5) { 2 } else { 1 };
    let (window, length) = match shape {
        WindowShape::Span => (EdgeRange::new(1, p.m), r.gen_range(1..=p.m)),
        WindowShape::Free => {
            let (a, b) = (r.gen_range(1..=p.m), r.gen_range(1..=p.m));
            let w = EdgeRange::new(a.min(b), a.max(b));
            (w, r.gen_range(1..=w.len()))
        }
        WindowShape::Tight => {
            let len = r.gen_range(1..=p.m);
            let start = r.gen_range(1..=p.m - len + 1);
            (EdgeRange::from_start(start, len), len)
        }
    };
    Task::new(id, demand, rational(num, den), length, window)
}

pub fn random_instance(p: &RandomParams, shape: WindowShape, seed: u64) -> Instance {
    assert!(p.m >= 1, "the path needs an edge");
    let mut r = rng(seed);
    let caps = capacities(&mut r, p);
    let tasks = (1..=p.n as u64).map(|id| task(&mut r, p, id, shape)).collect();
    Instance::new(p.m, caps, tasks).expect("generated tasks lie on the path")
}

/// `edges` distinct hyperedges drawn uniformly from `[q]^3`.
pub fn random_3dm(q: usize, edges: usize, seed: u64) -> Result<ThreeDM, HardnessError> {
    let total = q * q * q;
    if q == 0 || edges > total {
        return Err(HardnessError::Invalid(format!("cannot draw {edges} hyperedges over q = {q}")));
    }
    let mut r = rng(seed);
    let mut picks: Vec<usize> = (0..total).collect();
    picks.shuffle(&mut r);
    let hyperedges = picks[..edges]
        .iter()
        .map(|&c| (c / (q * q) + 1, (c / q) % q + 1, c % q + 1))
        .collect();
    ThreeDM::new(q, hyperedges, None)
}

/// A 3DM-k instance: every node occurs at least once and at most `k`
/// times. Each side lists every node once plus random extra occurrences;
/// the three lists are shuffled and zipped, redrawing on duplicates.
pub fn random_3dm_k(q: usize, k: usize, seed: u64) -> Result<ThreeDM, HardnessError> {
    if q == 0 || k == 0 {
        return Err(HardnessError::Invalid("q and k must be positive".into()));
    }
    let mut r = rng(seed);
    for _ in 0..1000 {
        let edges = r.gen_range(q..=q * k);
        let mut sides: Vec<Vec<usize>> = Vec::with_capacity(3);
        for _ in 0..3 {
            let mut count = vec![1usize; q];
            let mut extra = edges - q;
            while extra > 0 {
                let v = r.gen_range(0..q);
                if count[v] < k {
                    count[v] += 1;
                    extra -= 1;
                }
            }
            let mut list: Vec<usize> = count
                .iter()
                .enumerate()
                .flat_map(|(v, &c)| std::iter::repeat(v + 1).take(c))
                .collect();
            list.shuffle(&mut r);
            sides.push(list);
        }
        let hyperedges: Vec<(usize, usize, usize)> =
            (0..edges).map(|l| (sides[0][l], sides[1][l], sides[2][l])).collect();
        if let Ok(inst) = ThreeDM::new(q, hyperedges, Some(k)) {
            return Ok(inst);
        }
    }
    Err(HardnessError::Invalid(format!("no duplicate-free draw for q = {q}, k = {k}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::validate_instance;

    #[test]
    fn deterministic() {
        let p = RandomParams::new(5, 8);
        assert_eq!(random_instance(&p, WindowShape::Free, 7), random_instance(&p, WindowShape::Free, 7));
        assert_ne!(random_instance(&p, WindowShape::Free, 7), random_instance(&p, WindowShape::Free, 8));
        assert_eq!(random_3dm_k(4, 2, 3).unwrap(), random_3dm_k(4, 2, 3).unwrap());
    }

    #[test]
    fn shapes() {
        let p = RandomParams::new(6, 8);
        for seed in 0..20 {
            let span = random_instance(&p, WindowShape::Span, seed);
            assert!(span.is_span());
            let tight = random_instance(&p, WindowShape::Tight, seed);
            assert!(tight.tasks.iter().all(|t| t.window.len() == t.length));
            let free = random_instance(&p, WindowShape::Free, seed);
            assert!(validate_instance(&free).is_empty());
        }
    }

    #[test]
    fn three_dm_k_respects_bounds() {
        for seed in 0..50 {
            let k = random_3dm_k(5, 3, seed).unwrap();
            assert!(k.validate().is_ok());
            assert!(k.hyperedges.len() >= 5);
        }
        let all = random_3dm(2, 8, 1).unwrap();
        assert_eq!(all.hyperedges.len(), 8);
        assert!(random_3dm(1, 2, 1).is_err());
    }
}
