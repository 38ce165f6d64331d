//! The G(n, m, p) random intersection graph model.
//!
//! A bipartite graph between `n` nodes and `m` attributes is sampled with
//! independent edge probability `p`; the intersection graph joins two nodes
//! when they share an attribute.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RigError};

/// Below this probability edges are drawn by geometric gap-skipping.
pub const SPARSE_SAMPLING_THRESHOLD: f64 = 0.1;

/// The scaling triple from which `m` and `p` were derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub scaling: Option<Scaling>,
    /// Set when the scaling formula gave `p > 1` and it was clamped to 1.
    pub p_clamped: bool,
    pub seed: u64,
}

impl ModelParams {
    pub fn new(n: usize, m: usize, p: f64, seed: u64) -> Result<Self> {
        let params = ModelParams {
            n,
            m,
            p,
            scaling: None,
            p_clamped: false,
            seed,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(RigError::invalid("n must be at least 1"));
        }
        if self.m == 0 {
            return Err(RigError::invalid("m must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(RigError::invalid(format!("p = {} outside [0, 1]", self.p)));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        ModelParams {
            seed,
            ..self.clone()
        }
    }
}

/// Derives `m = max(1, floor(beta * n^alpha))` and
/// `p = min(1, gamma * n^(-(1 + alpha) / 2))`.
pub fn derive_params(alpha: f64, beta: f64, gamma: f64, n: usize, seed: u64) -> Result<ModelParams> {
    for (name, value) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(RigError::invalid(format!("{name} must be positive, got {value}")));
        }
    }
    if n == 0 {
        return Err(RigError::invalid("n must be at least 1"));
    }
    let nf = n as f64;
    let m_raw = (beta * nf.powf(alpha)).floor();
    if !m_raw.is_finite() || m_raw > usize::MAX as f64 {
        return Err(RigError::invalid("derived m overflows"));
    }
    let m = (m_raw as usize).max(1);
    let p_raw = gamma * nf.powf(-(1.0 + alpha) / 2.0);
    let p_clamped = p_raw > 1.0;
    Ok(ModelParams {
        n,
        m,
        p: p_raw.min(1.0),
        scaling: Some(Scaling { alpha, beta, gamma }),
        p_clamped,
        seed,
    })
}

/// The node/attribute incidence structure `B = (V, A, E)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    n_nodes: usize,
    attr_adj: Vec<Vec<usize>>,
    node_adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn empty(n_nodes: usize, n_attributes: usize) -> Self {
        BipartiteGraph {
            n_nodes,
            attr_adj: vec![Vec::new(); n_attributes],
            node_adj: vec![Vec::new(); n_nodes],
        }
    }

    /// Builds a graph from `(attribute, node)` incidences. Duplicates collapse.
    pub fn from_incidences<I>(n_nodes: usize, n_attributes: usize, incidences: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut attr_adj = vec![Vec::new(); n_attributes];
        for (a, v) in incidences {
            if a >= n_attributes {
                return Err(RigError::IndexOutOfRange {
                    index: a,
                    len: n_attributes,
                });
            }
            if v >= n_nodes {
                return Err(RigError::IndexOutOfRange { index: v, len: n_nodes });
            }
            attr_adj[a].push(v);
        }
        for list in &mut attr_adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self::from_sorted_attr_lists(n_nodes, attr_adj))
    }

    fn from_sorted_attr_lists(n_nodes: usize, attr_adj: Vec<Vec<usize>>) -> Self {
        let mut node_adj = vec![Vec::new(); n_nodes];
        // attributes are visited in increasing order, so node lists come out sorted
        for (a, nodes) in attr_adj.iter().enumerate() {
            for &v in nodes {
                node_adj[v].push(a);
            }
        }
        BipartiteGraph {
            n_nodes,
            attr_adj,
            node_adj,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_attributes(&self) -> usize {
        self.attr_adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.attr_adj.iter().map(Vec::len).sum()
    }

    /// `N_B(a)`: the sorted nodes adjacent to attribute `a`.
    pub fn attribute_nodes(&self, a: usize) -> &[usize] {
        &self.attr_adj[a]
    }

    /// The sorted attributes adjacent to node `v`.
    pub fn node_attributes(&self, v: usize) -> &[usize] {
        &self.node_adj[v]
    }

    pub fn has_incidence(&self, a: usize, v: usize) -> bool {
        self.attr_adj
            .get(a)
            .is_some_and(|nodes| nodes.binary_search(&v).is_ok())
    }

    /// All incidences as `(attribute, node)`, attribute-major and sorted.
    pub fn incidences(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.attr_adj
            .iter()
            .enumerate()
            .flat_map(|(a, nodes)| nodes.iter().map(move |&v| (a, v)))
    }

    /// Returns a copy with one extra incidence.
    pub fn with_incidence(&self, a: usize, v: usize) -> Result<Self> {
        Self::from_incidences(
            self.n_nodes,
            self.n_attributes(),
            self.incidences().chain(std::iter::once((a, v))),
        )
    }

    /// Restricts to the nodes and attributes for which the predicates hold,
    /// keeping original indices.
    pub fn restrict(&self, keep_node: impl Fn(usize) -> bool, keep_attr: impl Fn(usize) -> bool) -> Self {
        let attr_adj = self
            .attr_adj
            .iter()
            .enumerate()
            .map(|(a, nodes)| {
                if keep_attr(a) {
                    nodes.iter().copied().filter(|&v| keep_node(v)).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        Self::from_sorted_attr_lists(self.n_nodes, attr_adj)
    }
}

/// Samples `B` under `params`. Identical params give identical graphs.
///
/// For `p < 0.1` the `n * m` candidate pairs are walked with geometric
/// gap-skipping; otherwise each pair gets its own Bernoulli draw. The two
/// paths consume the generator differently, so they do not agree on a seed.
pub fn sample_bipartite(params: &ModelParams) -> Result<BipartiteGraph> {
    params.validate()?;
    let (n, m, p) = (params.n, params.m, params.p);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut attr_adj: Vec<Vec<usize>> = vec![Vec::new(); m];

    if p == 0.0 {
        // no edges
    } else if p < SPARSE_SAMPLING_THRESHOLD {
        let total = (n as u64)
            .checked_mul(m as u64)
            .ok_or_else(|| RigError::invalid("n * m overflows"))?;
        let log_q = (-p).ln_1p();
        let mut idx: u64 = 0;
        loop {
            let u: f64 = rng.random();
            // P(gap = g) = (1 - p)^g p
            let gap = ((1.0 - u).ln() / log_q).floor();
            if !gap.is_finite() || gap >= (total - idx) as f64 {
                break;
            }
            idx += gap as u64;
            let (a, v) = ((idx / n as u64) as usize, (idx % n as u64) as usize);
            attr_adj[a].push(v);
            idx += 1;
            if idx >= total {
                break;
            }
        }
    } else {
        for nodes in attr_adj.iter_mut() {
            for v in 0..n {
                if rng.random_bool(p) {
                    nodes.push(v);
                }
            }
        }
    }
    Ok(BipartiteGraph::from_sorted_attr_lists(n, attr_adj))
}

/// Simple undirected graph with sorted, duplicate-free adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntersectionGraph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

impl IntersectionGraph {
    pub fn edgeless(n: usize) -> Self {
        IntersectionGraph {
            adj: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Builds a graph from an undirected edge list. Parallel edges collapse;
    /// self-loops are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(RigError::IndexOutOfRange { index: w, len: n });
                }
            }
            if u == v {
                return Err(RigError::invalid(format!("self-loop at vertex {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        Ok(Self::from_adjacency_unchecked(adj))
    }

    /// Sorts and deduplicates each list. Lists must already be symmetric and
    /// loop-free.
    pub(crate) fn from_adjacency_unchecked(mut adj: Vec<Vec<usize>>) -> Self {
        let mut twice = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            twice += list.len();
        }
        IntersectionGraph {
            adj,
            edge_count: twice / 2,
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj.get(u).is_some_and(|l| l.binary_search(&v).is_ok())
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, l)| l.iter().copied().filter(move |&v| u < v).map(move |v| (u, v)))
    }

    /// Subgraph induced by `vertices`, relabelled `0..vertices.len()` in the
    /// given order. Duplicate vertices are an error.
    pub fn induced(&self, vertices: &[usize]) -> Result<Self> {
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in vertices.iter().enumerate() {
            if v >= self.n() {
                return Err(RigError::IndexOutOfRange { index: v, len: self.n() });
            }
            if local[v] != usize::MAX {
                return Err(RigError::invalid(format!("vertex {v} listed twice")));
            }
            local[v] = i;
        }
        let adj = vertices
            .iter()
            .map(|&v| {
                self.adj[v]
                    .iter()
                    .filter_map(|&w| (local[w] != usize::MAX).then_some(local[w]))
                    .collect()
            })
            .collect();
        Ok(Self::from_adjacency_unchecked(adj))
    }

    /// Removes the given vertices' edges but keeps the vertex set.
    pub fn without_vertices(&self, removed: &[usize]) -> Self {
        let mut gone = vec![false; self.n()];
        for &v in removed {
            gone[v] = true;
        }
        let adj = self
            .adj
            .iter()
            .enumerate()
            .map(|(v, l)| {
                if gone[v] {
                    Vec::new()
                } else {
                    l.iter().copied().filter(|&w| !gone[w]).collect()
                }
            })
            .collect();
        Self::from_adjacency_unchecked(adj)
    }
}

/// Projects `B` onto its nodes: `u ~ v` iff they share an attribute.
pub fn project(b: &BipartiteGraph) -> IntersectionGraph {
    let mut adj = vec![Vec::new(); b.n_nodes()];
    for a in 0..b.n_attributes() {
        let nodes = b.attribute_nodes(a);
        for (i, &u) in nodes.iter().enumerate() {
            for &v in &nodes[i + 1..] {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    IntersectionGraph::from_adjacency_unchecked(adj)
}
