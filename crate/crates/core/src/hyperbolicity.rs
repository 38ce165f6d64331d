//! Metric tree-likeness.
//!
//! Two quantities are kept apart here: the exact four-point δ of a
//! component, and the lower bound `floor(k / 4)` on the slim-triangle δ
//! certified by a k-special path (a path whose interior vertices all have
//! degree two and whose endpoints are joined by a second, disjoint path).

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RigError};
use crate::graph_core::{bfs_into, components, ComponentLabeling, Distance, INFINITE};
use crate::model::{project, BipartiteGraph, IntersectionGraph};
use crate::parallel;

pub const DEFAULT_FOUR_POINT_CAP: usize = 600;
/// Largest component the quartic reference implementation accepts.
pub const NAIVE_FOUR_POINT_CAP: usize = 60;

/// A non-negative multiple of 1/2, stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct HalfInteger(u64);

impl HalfInteger {
    pub const ZERO: HalfInteger = HalfInteger(0);

    pub fn from_twice(twice: u64) -> Self {
        HalfInteger(twice)
    }

    pub fn from_integer(value: u64) -> Self {
        HalfInteger(2 * value)
    }

    pub fn twice(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}.5", self.0 / 2)
        }
    }
}

/// Row-major distance matrix between `len` points.
struct DistanceMatrix {
    len: usize,
    data: Vec<Distance>,
}

impl DistanceMatrix {
    fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.len + j] as u64
    }

    /// BFS from each of `sources` over `g`, keeping only columns in `sources`.
    fn between(g: &IntersectionGraph, sources: &[usize]) -> Self {
        let rows = parallel::map_slice(sources, |&s| {
            let mut dist = vec![INFINITE; g.n()];
            bfs_into(g, s, &mut dist, &mut Default::default());
            sources.iter().map(|&t| dist[t]).collect::<Vec<_>>()
        });
        DistanceMatrix {
            len: sources.len(),
            data: rows.concat(),
        }
    }
}

/// Doubled four-point value of one quadruple: the gap between the largest
/// and the middle of the three pair sums.
fn quadruple_twice(d: &DistanceMatrix, x: usize, y: usize, z: usize, w: usize) -> u64 {
    let s1 = d.get(x, y) + d.get(z, w);
    let s2 = d.get(x, z) + d.get(y, w);
    let s3 = d.get(x, w) + d.get(y, z);
    let (hi, lo) = (s1.max(s2), s1.min(s2));
    if s3 >= hi {
        s3 - hi
    } else {
        hi - s3.max(lo)
    }
}

/// Doubled four-point δ over quadruples drawn from `pairs`, each pair
/// tagged with its distance.
///
/// Pairs are scanned by decreasing distance. A quadruple whose largest pair
/// sum is `d(x,y) + d(z,w)` has value at most `min(d(x,y), d(z,w))`, so once
/// the current pair's distance cannot beat the best value the scan stops.
fn four_point_twice(d: &DistanceMatrix, mut pairs: Vec<(u64, u32, u32)>) -> u64 {
    pairs.sort_unstable_by(|a, b| b.cmp(a));

    const CHUNK: usize = 4096;
    let mut best = 0u64;
    for (idx, &(dxy, x, y)) in pairs.iter().enumerate() {
        if 2 * dxy <= best {
            break;
        }
        let (x, y) = (x as usize, y as usize);
        let scan = |range: std::ops::Range<usize>| {
            pairs[range]
                .iter()
                .map(|&(_, z, w)| quadruple_twice(d, x, y, z as usize, w as usize))
                .max()
                .unwrap_or(0)
        };
        let found = if idx < 2 * CHUNK {
            scan(0..idx)
        } else {
            let chunks = idx.div_ceil(CHUNK);
            parallel::max_range(chunks, 0, |c| scan(c * CHUNK..((c + 1) * CHUNK).min(idx)))
        };
        best = best.max(found);
    }
    best
}

fn all_pairs(d: &DistanceMatrix) -> Vec<(u64, u32, u32)> {
    let k = d.len;
    let mut pairs = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            pairs.push((d.get(i, j), i as u32, j as u32));
        }
    }
    pairs
}

/// Pairs `(x, y)` where no neighbour of `x` is farther from `y` and no
/// neighbour of `y` is farther from `x`. Some quadruple attaining the
/// four-point δ of a graph has both of its largest-sum pairs far apart.
fn far_apart_pairs(g: &IntersectionGraph, d: &DistanceMatrix) -> Vec<(u64, u32, u32)> {
    let rows = parallel::map_range(g.n(), |x| {
        let mut out = Vec::new();
        for y in x + 1..g.n() {
            let dxy = d.get(x, y);
            if g.neighbors(x).iter().all(|&a| d.get(a, y) <= dxy) && g.neighbors(y).iter().all(|&b| d.get(x, b) <= dxy) {
                out.push((dxy, x as u32, y as u32));
            }
        }
        out
    });
    rows.concat()
}

fn resolve_component(g: &IntersectionGraph, component: Option<usize>) -> Result<(Vec<usize>, ComponentLabeling)> {
    let labels = components(g);
    let members = match component {
        Some(c) if c >= labels.count() => {
            return Err(RigError::IndexOutOfRange {
                index: c,
                len: labels.count(),
            })
        }
        Some(c) => labels.members(c),
        None if labels.count() > 1 => return Err(RigError::Disconnected),
        None => (0..g.n()).collect(),
    };
    Ok((members, labels))
}

/// Exact four-point δ of a connected graph, or of one labelled component.
pub fn four_point_delta(g: &IntersectionGraph, component: Option<usize>, size_cap: usize) -> Result<HalfInteger> {
    let (members, _) = resolve_component(g, component)?;
    if members.len() > size_cap {
        return Err(RigError::CapExceeded {
            what: "four-point delta component",
            size: members.len(),
            cap: size_cap,
        });
    }
    let sub = g.induced(&members)?;
    let all: Vec<usize> = (0..sub.n()).collect();
    let d = DistanceMatrix::between(&sub, &all);
    let pairs = far_apart_pairs(&sub, &d);
    Ok(HalfInteger::from_twice(four_point_twice(&d, pairs)))
}

/// Four-point δ restricted to quadruples from a seeded sample of
/// `sample_size` vertices of the component, using distances in the whole
/// component. A lower bound on the component's four-point δ; exact when the
/// component has at most `sample_size` vertices.
pub fn four_point_delta_sampled(
    g: &IntersectionGraph,
    component: Option<usize>,
    sample_size: usize,
    seed: u64,
) -> Result<HalfInteger> {
    let (members, _) = resolve_component(g, component)?;
    let sub = g.induced(&members)?;
    let sources: Vec<usize> = if sub.n() <= sample_size {
        (0..sub.n()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = rand::seq::index::sample(&mut rng, sub.n(), sample_size).into_vec();
        picked.sort_unstable();
        picked
    };
    let d = DistanceMatrix::between(&sub, &sources);
    let pairs = all_pairs(&d);
    Ok(HalfInteger::from_twice(four_point_twice(&d, pairs)))
}

/// Quartic reference implementation, for components up to
/// [`NAIVE_FOUR_POINT_CAP`] vertices.
pub fn four_point_delta_naive(g: &IntersectionGraph, component: Option<usize>) -> Result<HalfInteger> {
    let (members, _) = resolve_component(g, component)?;
    if members.len() > NAIVE_FOUR_POINT_CAP {
        return Err(RigError::CapExceeded {
            what: "naive four-point delta",
            size: members.len(),
            cap: NAIVE_FOUR_POINT_CAP,
        });
    }
    let sub = g.induced(&members)?;
    let all: Vec<usize> = (0..sub.n()).collect();
    let d = DistanceMatrix::between(&sub, &all);
    let k = sub.n();
    let mut best = 0;
    for x in 0..k {
        for y in x + 1..k {
            for z in y + 1..k {
                for w in z + 1..k {
                    best = best.max(quadruple_twice(&d, x, y, z, w));
                }
            }
        }
    }
    Ok(HalfInteger::from_twice(best))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialPath {
    /// Number of edges.
    pub k: usize,
    /// `v_1 .. v_{k+1}`; first and last coincide for a closed cycle.
    pub path: Vec<usize>,
}

impl SpecialPath {
    pub fn certificate(&self) -> usize {
        certificate_from_special_path(self.k)
    }

    pub fn interior(&self) -> &[usize] {
        &self.path[1..self.path.len() - 1]
    }
}

/// Lower bound on the slim-triangle δ from a k-special path.
pub fn certificate_from_special_path(k: usize) -> usize {
    k / 4
}

/// Bridges of `g` as `(u, v)` with `u < v`, sorted.
pub fn bridges(g: &IntersectionGraph) -> Vec<(usize, usize)> {
    let n = g.n();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut out = Vec::new();
    let mut timer = 0;
    // (vertex, parent, next neighbour index)
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        stack.push((root, usize::MAX, 0));
        while let Some(&mut (v, parent, ref mut next)) = stack.last_mut() {
            if let Some(&w) = g.neighbors(v).get(*next) {
                *next += 1;
                if w == parent {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, v, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if parent != usize::MAX {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > disc[parent] {
                        out.push((parent.min(v), parent.max(v)));
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Enumerates the maximal paths whose interior vertices all have degree two
/// and that are k-special: either the endpoints stay connected once the
/// path is removed, or the path closes into a cycle.
///
/// Maximal degree-2 chains are contracted in one pass; the second-path test
/// reduces to asking whether the chain's edges are bridges. Output is sorted
/// by decreasing `k`, then by path.
pub fn find_k_special_paths(g: &IntersectionGraph) -> Vec<SpecialPath> {
    let n = g.n();
    let bridge_list = bridges(g);
    let is_bridge = |u: usize, v: usize| bridge_list.binary_search(&(u.min(v), u.max(v))).is_ok();
    let mut visited = vec![false; n];
    let mut found = Vec::new();

    for start in 0..n {
        if g.degree(start) != 2 || visited[start] {
            continue;
        }
        visited[start] = true;
        let walk = |first: usize, visited: &mut Vec<bool>| -> (Vec<usize>, usize) {
            let (mut prev, mut cur) = (start, first);
            let mut interior = Vec::new();
            while g.degree(cur) == 2 && cur != start {
                visited[cur] = true;
                interior.push(cur);
                let nb = g.neighbors(cur);
                let next = if nb[0] == prev { nb[1] } else { nb[0] };
                prev = cur;
                cur = next;
            }
            (interior, cur)
        };
        let nb = g.neighbors(start);
        let (left, left_end) = walk(nb[0], &mut visited);
        if left_end == start {
            // the whole component is a cycle of degree-2 vertices
            let mut cycle: Vec<usize> = std::iter::once(start).chain(left).collect();
            let pivot = (0..cycle.len()).min_by_key(|&i| cycle[i]).unwrap();
            cycle.rotate_left(pivot);
            if cycle[1] > cycle[cycle.len() - 1] {
                cycle[1..].reverse();
            }
            cycle.push(cycle[0]);
            found.push(SpecialPath {
                k: cycle.len() - 1,
                path: cycle,
            });
            continue;
        }
        let (right, right_end) = walk(nb[1], &mut visited);
        let mut path = Vec::with_capacity(left.len() + right.len() + 3);
        path.push(left_end);
        path.extend(left.iter().rev());
        path.push(start);
        path.extend(right);
        path.push(right_end);
        let closed = left_end == right_end;
        if closed || !is_bridge(path[0], path[1]) {
            let last = path.len() - 1;
            if (path[0], path[1]) > (path[last], path[last - 1]) {
                path.reverse();
            }
            found.push(SpecialPath { k: last, path });
        }
    }

    for (u, v) in g.edges() {
        if g.degree(u) != 2 && g.degree(v) != 2 && !is_bridge(u, v) {
            found.push(SpecialPath { k: 1, path: vec![u, v] });
        }
    }
    found.sort_by(|a, b| b.k.cmp(&a.k).then_with(|| a.path.cmp(&b.path)));
    found
}

/// Checks the k-special definition directly: consecutive vertices adjacent,
/// interior vertices of degree two, and either a closed cycle or a second
/// endpoint connection avoiding the path's interior and edges.
pub fn is_k_special_path(g: &IntersectionGraph, path: &[usize]) -> bool {
    if path.len() < 2 || path.iter().any(|&v| v >= g.n()) {
        return false;
    }
    let k = path.len() - 1;
    let closed = path[0] == path[k];
    let body = if closed { &path[..k] } else { path };
    let mut seen = vec![false; g.n()];
    for &v in body {
        if std::mem::replace(&mut seen[v], true) {
            return false;
        }
    }
    if closed && k < 3 {
        return false;
    }
    if !path.windows(2).all(|w| g.has_edge(w[0], w[1])) {
        return false;
    }
    if !path[1..k].iter().all(|&v| g.degree(v) == 2) {
        return false;
    }
    if closed {
        return true;
    }
    let interior = &path[1..k];
    let mut blocked = vec![false; g.n()];
    for &v in interior {
        blocked[v] = true;
    }
    let (s, t) = (path[0], path[k]);
    let mut reached = vec![false; g.n()];
    reached[s] = true;
    let mut stack = vec![s];
    while let Some(v) = stack.pop() {
        for &w in g.neighbors(v) {
            // with no interior the path is the single edge s-t, which must not count
            if blocked[w] || reached[w] || (k == 1 && v == s && w == t) {
                continue;
            }
            reached[w] = true;
            stack.push(w);
        }
    }
    reached[t]
}

/// The exposed graph: `B` restricted to `(V \ X) x (A \ Y)` and projected.
#[derive(Debug, Clone)]
pub struct ExposedGraph {
    pub graph: IntersectionGraph,
    /// Local vertex -> original node index.
    pub nodes: Vec<usize>,
    pub labels: ComponentLabeling,
}

impl ExposedGraph {
    /// Original node indices of a component.
    pub fn component_nodes(&self, component: usize) -> Vec<usize> {
        self.labels.members(component).into_iter().map(|v| self.nodes[v]).collect()
    }
}

fn membership(indices: &[usize], len: usize, what: &str) -> Result<Vec<bool>> {
    let mut mask = vec![false; len];
    for &i in indices {
        if i >= len {
            return Err(RigError::InvalidQuery(format!("{what} index {i} out of range {len}")));
        }
        if std::mem::replace(&mut mask[i], true) {
            return Err(RigError::InvalidQuery(format!("{what} index {i} repeated")));
        }
    }
    Ok(mask)
}

pub fn exposed_giant(b: &BipartiteGraph, x_nodes: &[usize], y_attrs: &[usize]) -> Result<ExposedGraph> {
    let in_x = membership(x_nodes, b.n_nodes(), "node")?;
    let in_y = membership(y_attrs, b.n_attributes(), "attribute")?;
    let restricted = b.restrict(|v| !in_x[v], |a| !in_y[a]);
    let nodes: Vec<usize> = (0..b.n_nodes()).filter(|&v| !in_x[v]).collect();
    let graph = project(&restricted).induced(&nodes)?;
    let labels = components(&graph);
    Ok(ExposedGraph { graph, nodes, labels })
}

/// A candidate bipartite witness `v_1, ..., v_{2k-1}`: even positions
/// (0-based) are attributes, odd positions are nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartitePathQuery {
    pub x_nodes: Vec<usize>,
    pub y_attrs: Vec<usize>,
    /// Component id in the exposed graph's labelling.
    pub component: usize,
    pub path: Vec<usize>,
}

impl BipartitePathQuery {
    pub fn k(&self) -> usize {
        self.path.len().div_ceil(2)
    }

    /// Node vertices `v_2, v_4, ..., v_{2k-2}`.
    pub fn path_nodes(&self) -> Vec<usize> {
        self.path.iter().skip(1).step_by(2).copied().collect()
    }
}

/// Which requirement a bipartite witness violated. Positions are 1-based
/// indices into the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpecialCondition {
    /// `v_{position}` and `v_{position+1}` are not adjacent in `B`.
    PathEdge { position: usize },
    /// Condition (i): an endpoint attribute meets `X` outside the path.
    EndpointNeighbors { position: usize },
    /// Condition (ii): an interior attribute has extra neighbours.
    AttributeNeighbors { position: usize },
    /// Condition (iii): a path node shares some other attribute.
    NodeNeighbors { position: usize },
    /// An endpoint attribute has no neighbour in the chosen component.
    ComponentAttachment { position: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteCheck {
    pub accepted: bool,
    pub failure: Option<SpecialCondition>,
}

fn validate_query(b: &BipartiteGraph, q: &BipartitePathQuery) -> Result<(Vec<bool>, Vec<bool>)> {
    let len = q.path.len();
    if len < 3 || len.is_multiple_of(2) {
        return Err(RigError::InvalidQuery(format!("path length {len} is not 2k-1 for k >= 2")));
    }
    let in_x = membership(&q.x_nodes, b.n_nodes(), "node")?;
    let in_y = membership(&q.y_attrs, b.n_attributes(), "attribute")?;
    let mut seen_attr = vec![false; b.n_attributes()];
    let mut seen_node = vec![false; b.n_nodes()];
    for (i, &v) in q.path.iter().enumerate() {
        let pos = i + 1;
        if i % 2 == 0 {
            if v >= b.n_attributes() {
                return Err(RigError::InvalidQuery(format!("v_{pos} = {v} is not an attribute")));
            }
            let endpoint = i == 0 || i == len - 1;
            if endpoint && in_y[v] {
                return Err(RigError::InvalidQuery(format!("endpoint v_{pos} lies in Y")));
            }
            if !endpoint && !in_y[v] {
                return Err(RigError::InvalidQuery(format!("interior attribute v_{pos} not in Y")));
            }
            if std::mem::replace(&mut seen_attr[v], true) {
                return Err(RigError::InvalidQuery(format!("attribute {v} repeated on path")));
            }
        } else {
            if v >= b.n_nodes() {
                return Err(RigError::InvalidQuery(format!("v_{pos} = {v} is not a node")));
            }
            if !in_x[v] {
                return Err(RigError::InvalidQuery(format!("path node v_{pos} not in X")));
            }
            if std::mem::replace(&mut seen_node[v], true) {
                return Err(RigError::InvalidQuery(format!("node {v} repeated on path")));
            }
        }
    }
    Ok((in_x, in_y))
}

/// Evaluates the three bipartite witness conditions, plus path adjacency
/// and endpoint attachment to the chosen exposed component.
pub fn check_k_special_bipartite(b: &BipartiteGraph, q: &BipartitePathQuery) -> Result<BipartiteCheck> {
    let (in_x, _) = validate_query(b, q)?;
    let exposed = exposed_giant(b, &q.x_nodes, &q.y_attrs)?;
    if q.component >= exposed.labels.count() {
        return Err(RigError::InvalidQuery(format!(
            "component {} not in exposed graph with {} components",
            q.component,
            exposed.labels.count()
        )));
    }
    let reject = |failure| Ok(BipartiteCheck { accepted: false, failure: Some(failure) });
    let path = &q.path;
    let last = path.len() - 1;

    for i in 0..last {
        let (a, v) = if i % 2 == 0 { (path[i], path[i + 1]) } else { (path[i + 1], path[i]) };
        if !b.has_incidence(a, v) {
            return reject(SpecialCondition::PathEdge { position: i + 1 });
        }
    }

    for (i, inner) in [(0, 1), (last, last - 1)] {
        let in_path_only = b
            .attribute_nodes(path[i])
            .iter()
            .filter(|&&v| in_x[v])
            .all(|&v| v == path[inner]);
        if !in_path_only {
            return reject(SpecialCondition::EndpointNeighbors { position: i + 1 });
        }
    }

    for i in (2..last).step_by(2) {
        if b.attribute_nodes(path[i]) != [path[i - 1].min(path[i + 1]), path[i - 1].max(path[i + 1])] {
            return reject(SpecialCondition::AttributeNeighbors { position: i + 1 });
        }
    }

    for i in (1..last).step_by(2) {
        let node = path[i];
        let mut shared: Vec<usize> = b
            .node_attributes(node)
            .iter()
            .copied()
            .filter(|&a| b.attribute_nodes(a).len() > 1)
            .collect();
        shared.sort_unstable();
        let mut expected = [path[i - 1], path[i + 1]];
        expected.sort_unstable();
        if shared != expected {
            return reject(SpecialCondition::NodeNeighbors { position: i + 1 });
        }
    }

    let mut in_component = vec![false; b.n_nodes()];
    for v in exposed.component_nodes(q.component) {
        in_component[v] = true;
    }
    for i in [0, last] {
        if !b.attribute_nodes(path[i]).iter().any(|&v| in_component[v]) {
            return reject(SpecialCondition::ComponentAttachment { position: i + 1 });
        }
    }
    Ok(BipartiteCheck {
        accepted: true,
        failure: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperbolicityReport {
    pub four_point_delta: HalfInteger,
    pub component_size: usize,
    pub best_special_k: Option<usize>,
    pub certificate: Option<usize>,
    pub witness_path: Option<Vec<usize>>,
}

#[derive(Serialize)]
struct HyperbolicityReportJson<'a> {
    delta_num: u64,
    component_size: usize,
    special_k: Option<usize>,
    certificate: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<&'a [usize]>,
}

impl HyperbolicityReport {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(HyperbolicityReportJson {
            delta_num: self.four_point_delta.twice(),
            component_size: self.component_size,
            special_k: self.best_special_k,
            certificate: self.certificate,
            witness: self.witness_path.as_deref(),
        })
        .expect("report serializes")
    }
}

/// Four-point δ of the giant component together with the best special-path
/// certificate anywhere in `g`.
pub fn hyperbolicity_report(g: &IntersectionGraph, size_cap: usize) -> Result<HyperbolicityReport> {
    let labels = components(g);
    let (four_point_delta, component_size) = match labels.giant {
        Some(giant) => (four_point_delta(g, Some(giant), size_cap)?, labels.sizes[giant]),
        None => (HalfInteger::ZERO, 0),
    };
    let best = find_k_special_paths(g).into_iter().next();
    Ok(HyperbolicityReport {
        four_point_delta,
        component_size,
        best_special_k: best.as_ref().map(|p| p.k),
        certificate: best.as_ref().map(SpecialPath::certificate),
        witness_path: best.map(|p| p.path),
    })
}
