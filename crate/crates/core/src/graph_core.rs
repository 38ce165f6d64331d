//! Shared graph algorithms over [`IntersectionGraph`].

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Result, RigError};
use crate::model::IntersectionGraph;

/// Unweighted distance; [`INFINITE`] marks unreachable vertices.
pub type Distance = u32;
pub const INFINITE: Distance = Distance::MAX;

pub const DEFAULT_CLIQUE_CAP: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreDecomposition {
    /// Peeling order, earliest removed first.
    pub order: Vec<usize>,
    pub core_number: Vec<usize>,
    pub degeneracy: usize,
}

impl CoreDecomposition {
    /// `position[v]` is the index of `v` in `order`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (i, &v) in self.order.iter().enumerate() {
            pos[v] = i;
        }
        pos
    }
}

/// Min-degree peeling. Ties go to the lowest vertex index.
pub fn core_decomposition(g: &IntersectionGraph) -> CoreDecomposition {
    let n = g.n();
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|v| (degree[v], v)).collect();
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut core_number = vec![0; n];
    let mut level = 0;

    while let Some((d, v)) = queue.pop_first() {
        level = level.max(d);
        core_number[v] = level;
        removed[v] = true;
        order.push(v);
        for &w in g.neighbors(v) {
            if !removed[w] {
                queue.remove(&(degree[w], w));
                degree[w] -= 1;
                queue.insert((degree[w], w));
            }
        }
    }
    let degeneracy = core_number.iter().copied().max().unwrap_or(0);
    CoreDecomposition {
        order,
        core_number,
        degeneracy,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentLabeling {
    /// Component id per vertex; ids are assigned in order of lowest vertex.
    pub label: Vec<usize>,
    pub sizes: Vec<usize>,
    /// Largest component, smallest id on ties. `None` for the empty graph.
    pub giant: Option<usize>,
}

impl ComponentLabeling {
    pub fn members(&self, component: usize) -> Vec<usize> {
        (0..self.label.len()).filter(|&v| self.label[v] == component).collect()
    }

    pub fn giant_size(&self) -> usize {
        self.giant.map_or(0, |c| self.sizes[c])
    }

    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

pub fn components(g: &IntersectionGraph) -> ComponentLabeling {
    let n = g.n();
    let mut label = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        label[s] = id;
        queue.push_back(s);
        let mut size = 0;
        while let Some(v) = queue.pop_front() {
            size += 1;
            for &w in g.neighbors(v) {
                if label[w] == usize::MAX {
                    label[w] = id;
                    queue.push_back(w);
                }
            }
        }
        sizes.push(size);
    }
    let mut giant: Option<usize> = None;
    for (id, &size) in sizes.iter().enumerate() {
        if giant.is_none_or(|g| size > sizes[g]) {
            giant = Some(id);
        }
    }
    ComponentLabeling { label, sizes, giant }
}

pub fn bfs_distances(g: &IntersectionGraph, source: usize) -> Result<Vec<Distance>> {
    if source >= g.n() {
        return Err(RigError::IndexOutOfRange {
            index: source,
            len: g.n(),
        });
    }
    let mut dist = vec![INFINITE; g.n()];
    bfs_into(g, source, &mut dist, &mut VecDeque::new());
    Ok(dist)
}

/// BFS reusing caller buffers. `dist` must be all [`INFINITE`] on entry.
pub(crate) fn bfs_into(g: &IntersectionGraph, source: usize, dist: &mut [Distance], queue: &mut VecDeque<usize>) {
    dist[source] = 0;
    queue.clear();
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let next = dist[v] + 1;
        for &w in g.neighbors(v) {
            if dist[w] == INFINITE {
                dist[w] = next;
                queue.push_back(w);
            }
        }
    }
}

/// Exact clique number by branch and bound. Refuses graphs above `size_cap`.
pub fn brute_force_max_clique(g: &IntersectionGraph, size_cap: usize) -> Result<usize> {
    if g.n() > size_cap {
        return Err(RigError::CapExceeded {
            what: "max clique",
            size: g.n(),
            cap: size_cap,
        });
    }
    // candidates are kept in descending-degree order so big cliques surface early
    let mut initial: Vec<usize> = (0..g.n()).collect();
    initial.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));
    let mut best = 0;
    expand_clique(g, 0, &initial, &mut best);
    Ok(best)
}

fn expand_clique(g: &IntersectionGraph, size: usize, candidates: &[usize], best: &mut usize) {
    if candidates.is_empty() {
        *best = (*best).max(size);
        return;
    }
    for (i, &v) in candidates.iter().enumerate() {
        if size + candidates.len() - i <= *best {
            return;
        }
        let next: Vec<usize> = candidates[i + 1..]
            .iter()
            .copied()
            .filter(|&w| g.has_edge(v, w))
            .collect();
        expand_clique(g, size + 1, &next, best);
    }
}

/// Small named graphs used by tests, benches and examples.
pub mod generators {
    use crate::model::IntersectionGraph;

    pub fn complete(n: usize) -> IntersectionGraph {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        IntersectionGraph::from_edges(n, edges).unwrap()
    }

    /// Path on `n` vertices.
    pub fn path(n: usize) -> IntersectionGraph {
        IntersectionGraph::from_edges(n, (1..n).map(|v| (v - 1, v))).unwrap()
    }

    pub fn cycle(n: usize) -> IntersectionGraph {
        assert!(n >= 3);
        IntersectionGraph::from_edges(n, (0..n).map(|v| (v, (v + 1) % n))).unwrap()
    }

    pub fn star(leaves: usize) -> IntersectionGraph {
        IntersectionGraph::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).unwrap()
    }

    pub fn petersen() -> IntersectionGraph {
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let spokes = (0..5).map(|i| (i, i + 5));
        let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
        IntersectionGraph::from_edges(10, outer.chain(spokes).chain(inner)).unwrap()
    }

    /// Disjoint union, relabelling the second graph after the first.
    pub fn disjoint_union(a: &IntersectionGraph, b: &IntersectionGraph) -> IntersectionGraph {
        let shift = a.n();
        let edges = a.edges().chain(b.edges().map(|(u, v)| (u + shift, v + shift)));
        IntersectionGraph::from_edges(a.n() + b.n(), edges).unwrap()
    }

    /// Adds a new vertex adjacent to `anchor`.
    pub fn with_pendant(g: &IntersectionGraph, anchor: usize) -> IntersectionGraph {
        let n = g.n();
        IntersectionGraph::from_edges(n + 1, g.edges().chain(std::iter::once((anchor, n)))).unwrap()
    }

    /// Two hubs `0` and `1` joined by internally disjoint paths with the
    /// given numbers of edges. At most one arm may have length 1.
    pub fn theta(arms: &[usize]) -> IntersectionGraph {
        let mut edges = Vec::new();
        let mut next = 2;
        for &len in arms {
            assert!(len >= 1);
            let mut prev = 0;
            for _ in 1..len {
                edges.push((prev, next));
                prev = next;
                next += 1;
            }
            edges.push((prev, 1));
        }
        IntersectionGraph::from_edges(next, edges).unwrap()
    }

    /// Random labelled tree from a parent sequence: vertex `i > 0` attaches
    /// to `parents[i - 1] % i`.
    pub fn tree_from_parents(parents: &[usize]) -> IntersectionGraph {
        let n = parents.len() + 1;
        IntersectionGraph::from_edges(n, parents.iter().enumerate().map(|(i, &p)| (p % (i + 1), i + 1))).unwrap()
    }

    /// Erdős–Rényi G(n, q) from a seeded generator.
    pub fn gnp(n: usize, q: f64, seed: u64) -> IntersectionGraph {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(q) {
                    edges.push((u, v));
                }
            }
        }
        IntersectionGraph::from_edges(n, edges).unwrap()
    }
}
