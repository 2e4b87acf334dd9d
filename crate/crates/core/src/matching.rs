//! Degree-constrained bipartite matching by augmenting paths.
//!
//! Left nodes ("slots owners") need exactly `demand[b]` partners, right
//! nodes take at most one. Demands are expanded into unit slots, which is
//! cheap at the sizes this crate works with.

/// Returns, for every left node, the right nodes assigned to it, or `None`
/// when the demands cannot all be met. Deterministic: right nodes are
/// tried in increasing index order.
pub fn b_matching(
    demand: &[usize],
    num_right: usize,
    compatible: impl Fn(usize, usize) -> bool,
) -> Option<Vec<Vec<usize>>> {
    let total: usize = demand.iter().sum();
    if total > num_right {
        return None;
    }
    let adj: Vec<Vec<usize>> = (0..demand.len())
        .map(|b| (0..num_right).filter(|&t| compatible(b, t)).collect())
        .collect();
    for (b, &need) in demand.iter().enumerate() {
        if adj[b].len() < need {
            return None;
        }
    }
    let slots: Vec<usize> = demand
        .iter()
        .enumerate()
        .flat_map(|(b, &k)| std::iter::repeat(b).take(k))
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; num_right];
    let mut visited = vec![0usize; num_right];
    for (slot, _) in slots.iter().enumerate() {
        if !augment(slot, slot + 1, &slots, &adj, &mut owner, &mut visited) {
            return None;
        }
    }
    let mut out = vec![Vec::new(); demand.len()];
    for (t, o) in owner.iter().enumerate() {
        if let Some(slot) = o {
            out[slots[*slot]].push(t);
        }
    }
    Some(out)
}

fn augment(
    slot: usize,
    stamp: usize,
    slots: &[usize],
    adj: &[Vec<usize>],
    owner: &mut [Option<usize>],
    visited: &mut [usize],
) -> bool {
    for &t in &adj[slots[slot]] {
        if visited[t] == stamp {
            continue;
        }
        visited[t] = stamp;
        let free = match owner[t] {
            None => true,
            Some(other) => augment(other, stamp, slots, adj, owner, visited),
        };
        if free {
            owner[t] = Some(slot);
            return true;
        }
    }
    false
}
