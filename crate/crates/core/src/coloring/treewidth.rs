//! Exact treewidth for the small graphs produced by colour-class unions.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Result, RigError};
use crate::graph_core::{components, core_decomposition};
use crate::model::IntersectionGraph;

/// Bitmask search supports at most this many vertices per component.
pub const MAX_EXACT_VERTICES: usize = 64;

pub fn is_forest(g: &IntersectionGraph) -> bool {
    g.edge_count() + components(g).count() == g.n()
}

/// Exhaustively applies the treewidth-two reductions: drop vertices of
/// degree at most one, and replace a degree-two vertex by an edge between its
/// neighbours (merging parallel edges). Returns what is left, relabelled in
/// increasing original order.
pub fn series_parallel_reduce(g: &IntersectionGraph) -> IntersectionGraph {
    let n = g.n();
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).iter().copied().collect()).collect();
    let mut alive = vec![true; n];
    let mut pending: Vec<usize> = (0..n).rev().filter(|&v| adj[v].len() <= 2).collect();
    while let Some(v) = pending.pop() {
        if !alive[v] || adj[v].len() > 2 {
            continue;
        }
        alive[v] = false;
        let nbrs: Vec<usize> = std::mem::take(&mut adj[v]).into_iter().collect();
        for &w in &nbrs {
            adj[w].remove(&v);
        }
        if let [a, b] = nbrs[..] {
            adj[a].insert(b);
            adj[b].insert(a);
        }
        for &w in &nbrs {
            if adj[w].len() <= 2 {
                pending.push(w);
            }
        }
    }
    let keep: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    let mut local = vec![usize::MAX; n];
    for (i, &v) in keep.iter().enumerate() {
        local[v] = i;
    }
    let lists = keep
        .iter()
        .map(|&v| adj[v].iter().map(|&w| local[w]).collect())
        .collect();
    IntersectionGraph::from_adjacency_unchecked(lists)
}

pub fn treewidth_at_most_two(g: &IntersectionGraph) -> bool {
    series_parallel_reduce(g).n() == 0
}

/// Exact treewidth. Graphs of treewidth at most two are recognised directly;
/// otherwise the reduced graph is split into components and each one must fit
/// within `size_cap` vertices.
pub fn treewidth(g: &IntersectionGraph, size_cap: usize) -> Result<usize> {
    if g.edge_count() == 0 {
        return Ok(0);
    }
    if is_forest(g) {
        return Ok(1);
    }
    let reduced = series_parallel_reduce(g);
    if reduced.n() == 0 {
        return Ok(2);
    }
    let cap = size_cap.min(MAX_EXACT_VERTICES);
    let labels = components(&reduced);
    let mut parts = Vec::with_capacity(labels.count());
    for c in 0..labels.count() {
        let members = labels.members(c);
        if members.len() > cap {
            return Err(RigError::CapExceeded {
                what: "exact treewidth component",
                size: members.len(),
                cap,
            });
        }
        parts.push(reduced.induced(&members)?);
    }
    // reductions preserve treewidth once it is at least two
    Ok(parts.iter().map(exact_small).max().unwrap_or(0).max(2))
}

fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (mask != 0).then(|| {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            i
        })
    })
}

/// Neighbours of `v` in the graph obtained by eliminating `eliminated`:
/// the vertices outside it reachable from `v` through eliminated ones.
fn elimination_neighbours(adj: &[u64], eliminated: u64, v: usize) -> u64 {
    let mut comp = 1u64 << v;
    let mut frontier = comp;
    loop {
        let reach = bits(frontier).fold(0, |acc, u| acc | adj[u]);
        let fresh = reach & eliminated & !comp;
        if fresh == 0 {
            break;
        }
        comp |= fresh;
        frontier = fresh;
    }
    bits(comp).fold(0, |acc, u| acc | adj[u]) & !eliminated & !(1u64 << v)
}

struct Search<'a> {
    adj: &'a [u64],
    all: u64,
    width: u32,
    failed: HashSet<u64>,
}

impl Search<'_> {
    fn feasible(&mut self, eliminated: u64) -> bool {
        let remaining = self.all & !eliminated;
        if remaining.count_ones() <= self.width + 1 {
            return true;
        }
        if self.failed.contains(&eliminated) {
            return false;
        }
        for v in bits(remaining) {
            let q = elimination_neighbours(self.adj, eliminated, v);
            if q.count_ones() <= self.width && self.feasible(eliminated | (1u64 << v)) {
                return true;
            }
        }
        self.failed.insert(eliminated);
        false
    }
}

/// Width of the greedy min-degree elimination ordering.
fn min_degree_width(adj: &[u64], all: u64) -> u32 {
    let mut eliminated = 0u64;
    let mut width = 0;
    while eliminated != all {
        let (deg, v) = bits(all & !eliminated)
            .map(|v| (elimination_neighbours(adj, eliminated, v).count_ones(), v))
            .min()
            .unwrap();
        width = width.max(deg);
        eliminated |= 1u64 << v;
    }
    width
}

/// Elimination-ordering search over vertex subsets, deepening the width from
/// the degeneracy lower bound up to the greedy upper bound.
fn exact_small(g: &IntersectionGraph) -> usize {
    let n = g.n();
    debug_assert!(n <= MAX_EXACT_VERTICES);
    if n == 0 {
        return 0;
    }
    let adj: Vec<u64> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &w| m | (1u64 << w)))
        .collect();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let upper = min_degree_width(&adj, all);
    let mut width = core_decomposition(g).degeneracy as u32;
    while width < upper {
        let mut search = Search {
            adj: &adj,
            all,
            width,
            failed: HashSet::new(),
        };
        if search.feasible(0) {
            return width as usize;
        }
        width += 1;
    }
    upper as usize
}
