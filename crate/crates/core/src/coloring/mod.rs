//! Low-treewidth colourings by fraternal and transitive augmentation.
//!
//! Each round orients the current graph along its degeneracy order (arcs
//! point from later to earlier vertices, so in-degrees are bounded by the
//! degeneracy), then joins every pair of in-neighbours of a common vertex and
//! every 2-step arc `x -> y -> z` by an edge `x z`. The final colouring is
//! greedy on the augmented graph.

pub mod treewidth;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RigError};
use crate::graph_core::core_decomposition;
use crate::model::IntersectionGraph;
use crate::parallel;

pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_VERIFY_CAP: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasuredTreewidth {
    Exact(usize),
    /// The check only establishes a lower bound.
    AtLeast(usize),
    /// The reduced union exceeded the size cap.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub class_subset: Vec<u32>,
    pub induced_size: usize,
    pub claimed_bound: usize,
    pub measured_treewidth: MeasuredTreewidth,
    pub pass: bool,
}

impl VerificationRecord {
    pub fn skipped(&self) -> bool {
        self.measured_treewidth == MeasuredTreewidth::Skipped
    }

    /// A measured violation, as opposed to a skipped check.
    pub fn failed(&self) -> bool {
        !self.pass && !self.skipped()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringResult {
    pub k: usize,
    pub num_colors: usize,
    pub colors: Vec<u32>,
    pub augmentation_rounds: usize,
    #[serde(default)]
    pub verification: Vec<VerificationRecord>,
}

impl ColoringResult {
    pub const CSV_HEADER: &'static str = "n,k,num_colors,rounds";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.colors.len(), self.k, self.num_colors, self.augmentation_rounds)
    }

    pub fn class_members(&self, classes: &[u32]) -> Vec<usize> {
        (0..self.colors.len())
            .filter(|&v| classes.contains(&self.colors[v]))
            .collect()
    }
}

/// One augmentation round. Returns the augmented graph.
fn augment(g: &IntersectionGraph) -> IntersectionGraph {
    let pos = core_decomposition(g).positions();
    let n = g.n();
    let in_nbrs: Vec<Vec<usize>> = (0..n)
        .map(|v| g.neighbors(v).iter().copied().filter(|&w| pos[w] > pos[v]).collect())
        .collect();
    let mut adj: Vec<Vec<usize>> = (0..n).map(|v| g.neighbors(v).to_vec()).collect();
    let mut join = |a: usize, b: usize| {
        if a != b {
            adj[a].push(b);
            adj[b].push(a);
        }
    };
    for z in 0..n {
        let ins = &in_nbrs[z];
        for (i, &x) in ins.iter().enumerate() {
            for &y in &ins[i + 1..] {
                join(x, y);
            }
        }
        for &y in ins {
            for &x in &in_nbrs[y] {
                join(x, z);
            }
        }
    }
    IntersectionGraph::from_adjacency_unchecked(adj)
}

/// Greedy colouring in reverse peeling order: each vertex sees at most
/// `degeneracy` coloured neighbours.
fn greedy_coloring(g: &IntersectionGraph) -> Vec<u32> {
    let order = core_decomposition(g).order;
    let mut colors = vec![u32::MAX; g.n()];
    let mut taken: Vec<bool> = Vec::new();
    for &v in order.iter().rev() {
        taken.clear();
        for &w in g.neighbors(v) {
            let c = colors[w];
            if c != u32::MAX {
                let c = c as usize;
                if c >= taken.len() {
                    taken.resize(c + 1, false);
                }
                taken[c] = true;
            }
        }
        colors[v] = taken.iter().position(|&t| !t).unwrap_or(taken.len()) as u32;
    }
    colors
}

/// Augmentation rounds used for target `k`. Single classes only need a
/// proper colouring, so rounds start at `k = 3`, where one round already
/// makes every pair of classes induce a forest.
pub fn rounds_for(k: usize) -> usize {
    k.saturating_sub(2)
}

/// Colouring intended to make any `i < k` classes induce treewidth at most
/// `i`.
pub fn low_tw_coloring(g: &IntersectionGraph, k: usize) -> Result<ColoringResult> {
    if k == 0 {
        return Err(RigError::invalid("k must be at least 1"));
    }
    let rounds = rounds_for(k);
    let mut current = g.clone();
    for _ in 0..rounds {
        current = augment(&current);
    }
    let colors = greedy_coloring(&current);
    let num_colors = colors.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    Ok(ColoringResult {
        k,
        num_colors,
        colors,
        augmentation_rounds: rounds,
        verification: Vec::new(),
    })
}

fn binomial_at_most(n: usize, r: usize, limit: usize) -> bool {
    let mut acc: u128 = 1;
    for j in 0..r {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
        if acc > limit as u128 {
            return false;
        }
    }
    true
}

/// All `r`-subsets of `0..n` in lexicographic order.
fn all_subsets(n: usize, r: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = (0..r as u32).collect();
    if r > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..r).rev().find(|&i| (cur[i] as usize) < n - r + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..r {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Class subsets to check for each size `i < k`: all of them when there are
/// at most `samples`, otherwise `samples` seeded random draws.
fn class_subsets(num_colors: usize, k: usize, samples: usize, seed: u64) -> Vec<Vec<u32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for i in 1..k.min(num_colors + 1) {
        if binomial_at_most(num_colors, i, samples) {
            out.extend(all_subsets(num_colors, i));
        } else {
            for _ in 0..samples {
                let mut s: Vec<u32> = sample(&mut rng, num_colors, i).into_iter().map(|c| c as u32).collect();
                s.sort_unstable();
                out.push(s);
            }
        }
    }
    out
}

pub fn check_class_subset(g: &IntersectionGraph, result: &ColoringResult, classes: &[u32], size_cap: usize) -> VerificationRecord {
    let members = result.class_members(classes);
    let induced = g.induced(&members).expect("members are in range");
    let bound = classes.len();
    let measured = match bound {
        1 => {
            if induced.edge_count() == 0 {
                MeasuredTreewidth::Exact(0)
            } else if treewidth::is_forest(&induced) {
                MeasuredTreewidth::Exact(1)
            } else {
                MeasuredTreewidth::AtLeast(2)
            }
        }
        2 => {
            if treewidth::treewidth_at_most_two(&induced) {
                MeasuredTreewidth::Exact(treewidth::treewidth(&induced, size_cap).expect("treewidth at most two"))
            } else {
                MeasuredTreewidth::AtLeast(3)
            }
        }
        _ => match treewidth::treewidth(&induced, size_cap) {
            Ok(tw) => MeasuredTreewidth::Exact(tw),
            Err(_) => MeasuredTreewidth::Skipped,
        },
    };
    let pass = matches!(measured, MeasuredTreewidth::Exact(tw) if tw <= bound);
    VerificationRecord {
        class_subset: classes.to_vec(),
        induced_size: members.len(),
        claimed_bound: bound,
        measured_treewidth: measured,
        pass,
    }
}

/// Checks sampled unions of `i < k` colour classes against treewidth `i`.
pub fn verify_coloring(
    g: &IntersectionGraph,
    result: &ColoringResult,
    samples: usize,
    size_cap: usize,
    seed: u64,
) -> Result<Vec<VerificationRecord>> {
    if result.colors.len() != g.n() {
        return Err(RigError::Mismatch(format!(
            "coloring has {} vertices, graph has {}",
            result.colors.len(),
            g.n()
        )));
    }
    let used = result.colors.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    if used > result.num_colors {
        return Err(RigError::Mismatch(format!(
            "color id {} exceeds num_colors {}",
            used - 1,
            result.num_colors
        )));
    }
    let subsets = class_subsets(result.num_colors, result.k, samples, seed);
    Ok(parallel::map_slice(&subsets, |s| check_class_subset(g, result, s, size_cap)))
}

pub fn is_proper(g: &IntersectionGraph, colors: &[u32]) -> bool {
    colors.len() == g.n() && g.edges().all(|(u, v)| colors[u] != colors[v])
}
