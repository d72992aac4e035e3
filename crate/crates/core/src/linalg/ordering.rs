//! Fill-reducing orderings for planar mesh graphs.
//!
//! Nested dissection with breadth-first level-set separators: a
//! pseudo-peripheral vertex roots a BFS, the level containing the median
//! vertex becomes the separator, and the two sides are ordered recursively
//! before it. Small pieces fall back to reverse Cuthill-McKee.

use std::collections::VecDeque;

const LEAF_SIZE: usize = 48;

/// Returns `perm` with `perm[new] = old`.
pub fn nested_dissection(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    let mut active = vec![true; n];
    let mut level = vec![usize::MAX; n];
    let all: Vec<usize> = (0..n).collect();
    for comp in components(adj, &all, &active) {
        dissect(adj, comp, &mut active, &mut level, &mut order);
    }
    debug_assert_eq!(order.len(), n);
    order
}

/// Orders `interior` by nested dissection (on the graph they induce) and
/// appends `last` unchanged. Returns `perm[new] = old` over `interior ++ last`
/// as positions into the original vertex numbering.
pub fn nested_dissection_with_trailing(adj: &[Vec<usize>], interior: &[usize], last: &[usize]) -> Vec<usize> {
    let mut local = vec![usize::MAX; adj.len()];
    for (k, &v) in interior.iter().enumerate() {
        local[v] = k;
    }
    let sub: Vec<Vec<usize>> = interior
        .iter()
        .map(|&v| adj[v].iter().filter_map(|&w| (local[w] != usize::MAX).then_some(local[w])).collect())
        .collect();
    let mut perm: Vec<usize> = nested_dissection(&sub).into_iter().map(|k| interior[k]).collect();
    perm.extend_from_slice(last);
    perm
}

fn components(adj: &[Vec<usize>], verts: &[usize], active: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for &s in verts {
        if !active[s] || !seen.insert(s) {
            continue;
        }
        let mut comp = vec![s];
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &w in &adj[v] {
                if active[w] && seen.insert(w) {
                    comp.push(w);
                    q.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// BFS levels from `root` restricted to active vertices; returns the level sets.
fn bfs_levels(adj: &[Vec<usize>], root: usize, active: &[bool], level: &mut [usize]) -> Vec<Vec<usize>> {
    let mut levels = vec![vec![root]];
    level[root] = 0;
    let mut touched = vec![root];
    loop {
        let mut next = Vec::new();
        for &v in levels.last().unwrap() {
            for &w in &adj[v] {
                if active[w] && level[w] == usize::MAX {
                    level[w] = levels.len();
                    touched.push(w);
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    for v in touched {
        level[v] = usize::MAX;
    }
    levels
}

fn pseudo_peripheral(adj: &[Vec<usize>], comp: &[usize], active: &[bool], level: &mut [usize]) -> usize {
    let mut root = comp[0];
    let mut depth = 0;
    for _ in 0..8 {
        let levels = bfs_levels(adj, root, active, level);
        if levels.len() <= depth {
            break;
        }
        depth = levels.len();
        let last = levels.last().unwrap();
        // lowest-degree vertex of the farthest level, ties by index
        root = *last.iter().min_by_key(|&&v| (adj[v].iter().filter(|&&w| active[w]).count(), v)).unwrap();
    }
    root
}

fn dissect(adj: &[Vec<usize>], comp: Vec<usize>, active: &mut [bool], level: &mut [usize], order: &mut Vec<usize>) {
    if comp.len() <= LEAF_SIZE {
        rcm(adj, &comp, active, level, order);
        return;
    }
    let root = pseudo_peripheral(adj, &comp, active, level);
    let levels = bfs_levels(adj, root, active, level);
    if levels.len() < 3 {
        rcm(adj, &comp, active, level, order);
        return;
    }
    let half = comp.len() / 2;
    let mut acc = 0;
    let mut sep_level = 1;
    for (k, l) in levels.iter().enumerate() {
        acc += l.len();
        if acc > half {
            sep_level = k.clamp(1, levels.len() - 2);
            break;
        }
    }
    let mut separator = levels[sep_level].clone();
    separator.sort_unstable();
    for &v in &separator {
        active[v] = false;
    }
    let rest: Vec<usize> = comp.iter().copied().filter(|&v| active[v]).collect();
    for sub in components(adj, &rest, active) {
        dissect(adj, sub, active, level, order);
    }
    order.extend_from_slice(&separator);
}

/// Reverse Cuthill-McKee on one connected piece; deactivates what it orders.
fn rcm(adj: &[Vec<usize>], comp: &[usize], active: &mut [bool], level: &mut [usize], order: &mut Vec<usize>) {
    let mut local = Vec::with_capacity(comp.len());
    let mut pending: Vec<usize> = comp.to_vec();
    while let Some(&start) = pending.iter().find(|&&v| active[v]) {
        let root = pseudo_peripheral(adj, &[start], active, level);
        let mut q = VecDeque::from([root]);
        active[root] = false;
        while let Some(v) = q.pop_front() {
            local.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| active[w]).collect();
            nbrs.sort_by_key(|&w| (adj[w].len(), w));
            for w in nbrs {
                active[w] = false;
                q.push_back(w);
            }
        }
        pending.retain(|&v| active[v]);
    }
    local.reverse();
    order.extend(local);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, ny: usize) -> Vec<Vec<usize>> {
        let id = |i: usize, j: usize| i + nx * j;
        let mut adj = vec![Vec::new(); nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                if i + 1 < nx {
                    adj[id(i, j)].push(id(i + 1, j));
                    adj[id(i + 1, j)].push(id(i, j));
                }
                if j + 1 < ny {
                    adj[id(i, j)].push(id(i, j + 1));
                    adj[id(i, j + 1)].push(id(i, j));
                }
            }
        }
        adj
    }

    #[test]
    fn ordering_is_a_permutation() {
        for (nx, ny) in [(1, 1), (3, 2), (20, 30), (64, 5)] {
            let adj = grid(nx, ny);
            let mut p = nested_dissection(&adj);
            p.sort_unstable();
            assert_eq!(p, (0..nx * ny).collect::<Vec<_>>());
        }
    }

    #[test]
    fn disconnected_graph_and_trailing_block() {
        let mut adj = grid(10, 10);
        adj.push(Vec::new());
        let p = nested_dissection(&adj);
        assert_eq!(p.len(), 101);
        let interior: Vec<usize> = (0..50).collect();
        let last: Vec<usize> = (50..101).collect();
        let q = nested_dissection_with_trailing(&adj, &interior, &last);
        assert_eq!(&q[50..], &last[..]);
        let mut head = q[..50].to_vec();
        head.sort_unstable();
        assert_eq!(head, interior);
    }
}
