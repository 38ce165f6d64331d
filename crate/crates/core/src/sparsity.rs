//! Structural sparsity measurements: degeneracy, attribute degrees, exact
//! maximum subgraph density (the depth-0 grad), degree tails and
//! neighbourhood concentration.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RigError};
use crate::flow::FlowNetwork;
use crate::graph_core::core_decomposition;
use crate::model::{BipartiteGraph, IntersectionGraph};

/// Edge density `|E(H)| / |V(H)|` as an exact reduced fraction.
pub type Density = Ratio<u64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeDegreeStats {
    pub max_degree: usize,
    /// Degree -> number of attributes with that degree.
    pub histogram: BTreeMap<usize, usize>,
}

pub fn attribute_degree_stats(b: &BipartiteGraph) -> AttributeDegreeStats {
    let mut histogram = BTreeMap::new();
    let mut max_degree = 0;
    for a in 0..b.n_attributes() {
        let d = b.attribute_nodes(a).len();
        *histogram.entry(d).or_insert(0) += 1;
        max_degree = max_degree.max(d);
    }
    AttributeDegreeStats { max_degree, histogram }
}

/// Any attribute above this degree is unlikely once `alpha > 1`:
/// `2 (alpha + c) / (alpha - 1)`.
pub fn attribute_degree_threshold(alpha: f64, c: f64) -> Result<f64> {
    if alpha.is_nan() || alpha <= 1.0 {
        return Err(RigError::invalid(format!("threshold needs alpha > 1, got {alpha}")));
    }
    Ok(2.0 * (alpha + c) / (alpha - 1.0))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensestSubgraph {
    pub density: Density,
    /// Sorted vertex set achieving `density`.
    pub witness: Vec<usize>,
}

fn induced_edge_count(g: &IntersectionGraph, in_set: &[bool]) -> u64 {
    g.edges().filter(|&(u, v)| in_set[u] && in_set[v]).count() as u64
}

/// Finds a vertex set `S` maximising `den * |E(S)| - num * |S|` via a
/// min cut, returning it only if the objective is positive.
fn improve(g: &IntersectionGraph, edges: &[(usize, usize)], guess: Density) -> Option<Vec<bool>> {
    let (num, den) = (*guess.numer() as i64, *guess.denom() as i64);
    let (s, t) = (0, 1);
    let first_vertex = 2 + edges.len();
    let mut net = FlowNetwork::new(first_vertex + g.n());
    let unbounded = den * edges.len() as i64 + 1;
    for (i, &(u, v)) in edges.iter().enumerate() {
        net.add_arc(s, 2 + i, den);
        net.add_arc(2 + i, first_vertex + u, unbounded);
        net.add_arc(2 + i, first_vertex + v, unbounded);
    }
    for v in 0..g.n() {
        net.add_arc(first_vertex + v, t, num);
    }
    let cut = net.max_flow(s, t);
    if den * edges.len() as i64 - cut <= 0 {
        return None;
    }
    let side = net.source_side(s);
    Some((0..g.n()).map(|v| side[first_vertex + v]).collect())
}

/// Exact maximum of `|E(H)| / |V(H)|` over non-empty subgraphs, by
/// Dinkelbach iteration over exact min-cut subproblems.
///
/// Each round either proves the current density optimal or finds a strictly
/// denser vertex set; densities come from a finite set, so it terminates.
/// Returns `None` only for the graph with no vertices.
pub fn densest_subgraph(g: &IntersectionGraph) -> Option<DensestSubgraph> {
    if g.n() == 0 {
        return None;
    }
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let mut members = vec![true; g.n()];
    let mut density = Density::new(edges.len() as u64, g.n() as u64);
    while let Some(better) = improve(g, &edges, density) {
        let size = better.iter().filter(|&&x| x).count() as u64;
        let candidate = Density::new(induced_edge_count(g, &better), size);
        debug_assert!(candidate > density);
        if candidate <= density {
            break;
        }
        density = candidate;
        members = better;
    }
    Some(DensestSubgraph {
        density,
        witness: (0..g.n()).filter(|&v| members[v]).collect(),
    })
}

/// For each threshold `d`, the fraction of vertices with degree at least `d`.
pub fn degree_tail(g: &IntersectionGraph, thresholds: &[usize]) -> Vec<(usize, f64)> {
    let n = g.n();
    thresholds
        .iter()
        .map(|&d| {
            let count = (0..n).filter(|&v| g.degree(v) >= d).count();
            let frac = if n == 0 { 0.0 } else { count as f64 / n as f64 };
            (d, frac)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationCheck {
    pub subset_size: usize,
    pub observed: usize,
    pub expected: f64,
    pub epsilon: f64,
    pub within_lower: bool,
    pub within_upper: bool,
}

impl ConcentrationCheck {
    pub fn within(&self) -> bool {
        self.within_lower && self.within_upper
    }
}

/// Compares `|N_B(S)|` against `(1 ± epsilon) |S| m p`.
pub fn concentration_check(b: &BipartiteGraph, subset: &[usize], p: f64, epsilon: f64) -> Result<ConcentrationCheck> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(RigError::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(RigError::invalid(format!("p = {p} outside [0, 1]")));
    }
    let mut hit = vec![false; b.n_attributes()];
    let mut in_subset = vec![false; b.n_nodes()];
    for &v in subset {
        if v >= b.n_nodes() {
            return Err(RigError::IndexOutOfRange {
                index: v,
                len: b.n_nodes(),
            });
        }
        if std::mem::replace(&mut in_subset[v], true) {
            return Err(RigError::invalid(format!("node {v} listed twice in subset")));
        }
        for &a in b.node_attributes(v) {
            hit[a] = true;
        }
    }
    let observed = hit.iter().filter(|&&h| h).count();
    let expected = subset.len() as f64 * b.n_attributes() as f64 * p;
    Ok(ConcentrationCheck {
        subset_size: subset.len(),
        observed,
        expected,
        epsilon,
        within_lower: observed as f64 >= (1.0 - epsilon) * expected,
        within_upper: observed as f64 <= (1.0 + epsilon) * expected,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsityReport {
    pub degeneracy: usize,
    /// Known only when the bipartite graph is available.
    pub max_attribute_degree: Option<usize>,
    pub clique_lower_bound: Option<usize>,
    pub grad0: Density,
    pub degree_tail: Vec<(usize, f64)>,
}

#[derive(Serialize)]
struct TailEntry {
    threshold: usize,
    fraction: f64,
}

#[derive(Serialize)]
struct SparsityReportJson {
    degeneracy: usize,
    max_attribute_degree: Option<usize>,
    grad0_num: u64,
    grad0_den: u64,
    degree_tail: Vec<TailEntry>,
}

impl SparsityReport {
    pub fn to_json_value(&self) -> serde_json::Value {
        let wire = SparsityReportJson {
            degeneracy: self.degeneracy,
            max_attribute_degree: self.max_attribute_degree,
            grad0_num: *self.grad0.numer(),
            grad0_den: *self.grad0.denom(),
            degree_tail: self
                .degree_tail
                .iter()
                .map(|&(threshold, fraction)| TailEntry { threshold, fraction })
                .collect(),
        };
        serde_json::to_value(wire).expect("report serializes")
    }
}

pub const DEFAULT_TAIL_THRESHOLDS: [usize; 6] = [1, 2, 4, 8, 16, 32];

/// Full report for `g`, using `b` (when given) for attribute degrees.
pub fn analyze(g: &IntersectionGraph, b: Option<&BipartiteGraph>, thresholds: &[usize]) -> SparsityReport {
    let degeneracy = core_decomposition(g).degeneracy;
    let max_attribute_degree = b.map(|b| attribute_degree_stats(b).max_degree);
    let grad0 = densest_subgraph(g).map_or(Density::from_integer(0), |d| d.density);
    SparsityReport {
        degeneracy,
        max_attribute_degree,
        clique_lower_bound: max_attribute_degree,
        grad0,
        degree_tail: degree_tail(g, thresholds),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::generators::*;
    use crate::graph_core::brute_force_max_clique;
    use crate::model::{project, sample_bipartite, ModelParams};
    use proptest::prelude::*;

    /// Maximum subgraph density by enumerating every non-empty vertex subset.
    fn density_oracle(g: &IntersectionGraph) -> Density {
        let n = g.n();
        let edges: Vec<(usize, usize)> = g.edges().collect();
        (1u32..(1 << n))
            .map(|mask| {
                let e = edges.iter().filter(|&&(u, v)| mask >> u & 1 == 1 && mask >> v & 1 == 1).count();
                Density::new(e as u64, mask.count_ones() as u64)
            })
            .max()
            .unwrap()
    }

    #[test]
    fn attribute_stats_examples() {
        let b = sample_bipartite(&ModelParams::new(4, 2, 1.0, 0).unwrap()).unwrap();
        let stats = attribute_degree_stats(&b);
        assert_eq!(stats.max_degree, 4);
        assert_eq!(stats.histogram, BTreeMap::from([(4, 2)]));
        assert_eq!(attribute_degree_stats(&BipartiteGraph::empty(3, 2)).max_degree, 0);
    }

    #[test]
    fn attribute_threshold_at_alpha_three_halves() {
        assert!((attribute_degree_threshold(1.5, 1.0).unwrap() - 10.0).abs() < 1e-12);
        assert!(attribute_degree_threshold(1.0, 1.0).is_err());
    }

    #[test]
    fn densest_examples() {
        let k4 = densest_subgraph(&complete(4)).unwrap();
        assert_eq!(k4.density, Density::new(3, 2));
        assert_eq!(k4.witness, vec![0, 1, 2, 3]);

        assert_eq!(densest_subgraph(&cycle(6)).unwrap().density, Density::from_integer(1));

        let g = with_pendant(&complete(4), 0);
        assert_eq!(density_oracle(&g), Density::new(3, 2));
        let d = densest_subgraph(&g).unwrap();
        assert_eq!(d.density, Density::new(3, 2));
        assert_eq!(d.witness, vec![0, 1, 2, 3]);

        let empty = densest_subgraph(&IntersectionGraph::edgeless(3)).unwrap();
        assert_eq!(empty.density, Density::from_integer(0));
        assert!(densest_subgraph(&IntersectionGraph::edgeless(0)).is_none());
    }

    #[test]
    fn degree_tail_examples() {
        assert_eq!(degree_tail(&complete(5), &[4]), vec![(4, 1.0)]);
        assert_eq!(degree_tail(&IntersectionGraph::edgeless(5), &[1]), vec![(1, 0.0)]);
        assert_eq!(degree_tail(&star(9), &[2]), vec![(2, 0.1)]);
        assert_eq!(degree_tail(&IntersectionGraph::edgeless(0), &[0]), vec![(0, 0.0)]);
    }

    #[test]
    fn concentration_examples() {
        let full = sample_bipartite(&ModelParams::new(6, 5, 1.0, 0).unwrap()).unwrap();
        let c = concentration_check(&full, &[0, 3], 1.0, 0.5).unwrap();
        assert_eq!(c.observed, 5);

        let empty = BipartiteGraph::empty(6, 5);
        let c = concentration_check(&empty, &[0, 1], 0.2, 0.5).unwrap();
        assert_eq!(c.observed, 0);
        assert!(!c.within_lower);
        assert!(c.within_upper);

        assert!(concentration_check(&empty, &[0], 0.2, 0.0).is_err());
        assert!(concentration_check(&empty, &[0], 0.2, 1.0).is_err());
        assert!(concentration_check(&empty, &[6], 0.2, 0.5).is_err());
        assert!(concentration_check(&empty, &[1, 1], 0.2, 0.5).is_err());
    }

    #[test]
    fn concentration_majority_at_alpha_three_halves() {
        use rand::SeedableRng;
        let within = (0..50u64)
            .filter(|&seed| {
                let params = crate::model::derive_params(1.5, 0.1, 5.0, 5000, 7 + seed).unwrap();
                let b = sample_bipartite(&params).unwrap();
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let s = rand::seq::index::sample(&mut rng, 5000, 50).into_vec();
                concentration_check(&b, &s, params.p, 0.1).unwrap().within()
            })
            .count();
        assert!(within > 25, "{within} of 50 within bounds");
    }

    #[test]
    fn report_json_fields() {
        let b = BipartiteGraph::from_incidences(4, 1, [(0, 0), (0, 1), (0, 2), (0, 3)]).unwrap();
        let g = project(&b);
        let report = analyze(&g, Some(&b), &[3]);
        let json = report.to_json_value();
        let keys: Vec<&String> = json.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["degeneracy", "degree_tail", "grad0_den", "grad0_num", "max_attribute_degree"]);
        assert_eq!(json["degeneracy"], 3);
        assert_eq!(json["max_attribute_degree"], 4);
        assert_eq!(json["grad0_num"], 3);
        assert_eq!(json["grad0_den"], 2);
        assert_eq!(json["degree_tail"][0]["fraction"], 1.0);
    }

    proptest! {
        #[test]
        fn densest_matches_subset_enumeration(n in 1usize..=12, q in 0.0f64..1.0, seed: u64) {
            let g = gnp(n, q, seed);
            let d = densest_subgraph(&g).unwrap();
            prop_assert_eq!(d.density, density_oracle(&g));
            let sub = g.induced(&d.witness).unwrap();
            prop_assert_eq!(Density::new(sub.edge_count() as u64, sub.n() as u64), d.density);
        }

        #[test]
        fn report_invariants(n in 1usize..40, m in 1usize..40, p in 0.0f64..0.5, seed: u64) {
            let b = sample_bipartite(&ModelParams::new(n, m, p, seed).unwrap()).unwrap();
            let g = project(&b);
            let r = analyze(&g, Some(&b), &DEFAULT_TAIL_THRESHOLDS);
            let lb = r.clique_lower_bound.unwrap();
            prop_assert!(r.degeneracy + 1 >= lb);
            prop_assert!(lb <= brute_force_max_clique(&g, 40).unwrap());
            prop_assert!(r.grad0 >= Density::new(g.edge_count() as u64, n as u64));
            // d-degenerate graphs contain a subgraph of min degree d, hence density >= d/2
            prop_assert!(Density::from_integer(r.degeneracy as u64) <= r.grad0 * 2);
            let fracs: Vec<f64> = r.degree_tail.iter().map(|t| t.1).collect();
            prop_assert!(fracs.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(fracs.iter().all(|f| (0.0..=1.0).contains(f)));
        }
    }
}
