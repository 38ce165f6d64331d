//! Acceptance suite. Runs each criterion, prints one PASS/FAIL line per
//! criterion, and exits non-zero if any fails.
//!
//! Pass criterion numbers as arguments to run a subset.

use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rig_core::coloring::{low_tw_coloring, verify_coloring};
use rig_core::experiments::{preset, run_experiment, ExperimentResult};
use rig_core::graph_core::generators::{theta, tree_from_parents};
use rig_core::graph_core::{components, core_decomposition};
use rig_core::hyperbolicity::{
    certificate_from_special_path, find_k_special_paths, four_point_delta, four_point_delta_naive, HalfInteger,
};
use rig_core::model::{derive_params, project, sample_bipartite, IntersectionGraph, ModelParams};
use rig_core::sparsity::{attribute_degree_threshold, densest_subgraph};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn minutes(m: u64) -> Duration {
    Duration::from_secs(60 * m)
}

fn medians_of(r: &ExperimentResult, n: usize, measurement: &str) -> f64 {
    r.median(n, measurement)
        .unwrap_or_else(|| panic!("no median for {measurement} at n = {n}"))
}

fn degeneracy_alpha_half() -> Verdict {
    let r = run_experiment(&preset("degen-alpha-0.5").unwrap()).unwrap();
    let (lo, hi) = (medians_of(&r, 1000, "degeneracy"), medians_of(&r, 16000, "degeneracy"));
    let ratio = hi / lo;
    verdict(
        (1.5..=3.5).contains(&ratio),
        format!("median degeneracy {lo} at n=1000, {hi} at n=16000, ratio {ratio:.3} (need [1.5, 3.5])"),
    )
}

fn bounded_alpha_three_halves() -> Verdict {
    let r = run_experiment(&preset("degen-alpha-1.5").unwrap()).unwrap();
    let (lo, hi) = (medians_of(&r, 500, "degeneracy"), medians_of(&r, 8000, "degeneracy"));
    let threshold = attribute_degree_threshold(1.5, 1.0).unwrap();
    let mut worst = usize::MAX;
    for &n in &r.config.n_values {
        let within = r
            .row(n, "max_attr_degree")
            .unwrap()
            .values
            .iter()
            .filter(|&&d| d <= threshold)
            .count();
        worst = worst.min(within);
    }
    verdict(
        hi - lo <= 2.0 && worst >= 9,
        format!(
            "median degeneracy {lo} at n=500, {hi} at n=8000 (need growth <= 2); \
             max attribute degree <= {threshold} in at least {worst}/10 trials at every n (need 9)"
        ),
    )
}

fn coloring_flattening() -> Verdict {
    let mut config = preset("fig-expdata-desk").unwrap();
    config.measurements.coloring_k = vec![2, 3, 4];
    let r = run_experiment(&config).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [2, 3] {
        let name = format!("colors_k{k}");
        let (lo, hi) = (medians_of(&r, 1000, &name), medians_of(&r, 8000, &name));
        pass &= hi <= 1.5 * lo;
        parts.push(format!("k={k}: {lo} at n=1000, {hi} at n=8000"));
    }
    let k4: Vec<String> = r
        .config
        .n_values
        .iter()
        .map(|&n| format!("{}", medians_of(&r, n, "colors_k4")))
        .collect();
    parts.push(format!("k=4 medians {}", k4.join("/")));
    verdict(pass, parts.join("; "))
}

fn coloring_validity() -> Verdict {
    let (mut records, mut bad) = (0, 0);
    for trial in 0..10u64 {
        let params = derive_params(1.5, 0.1, 5.0, 2000, 1 + trial).unwrap();
        let g = project(&sample_bipartite(&params).unwrap());
        for k in [2, 3] {
            let r = low_tw_coloring(&g, k).unwrap();
            let rec = verify_coloring(&g, &r, 100, 30, trial).unwrap();
            records += rec.len();
            bad += rec.iter().filter(|r| !r.pass).count();
        }
    }
    verdict(bad == 0, format!("{records} records over 10 graphs at n=2000, {bad} not passing"))
}

/// Small-graph corpus shared by the oracle criteria: half Erdős–Rényi, half
/// intersection graphs, all with at most 12 vertices.
fn small_corpus() -> Vec<IntersectionGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = Vec::new();
    for i in 0..200 {
        let n = rng.random_range(1..=12);
        if i % 2 == 0 {
            let q: f64 = rng.random_range(0.0..0.7);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random_bool(q) {
                        edges.push((u, v));
                    }
                }
            }
            out.push(IntersectionGraph::from_edges(n, edges).unwrap());
        } else {
            let m = rng.random_range(1..=10);
            let p = rng.random_range(0.05..0.5);
            let params = ModelParams::new(n, m, p, rng.random()).unwrap();
            out.push(project(&sample_bipartite(&params).unwrap()));
        }
    }
    out
}

/// All-pairs distances by Floyd–Warshall; `u64::MAX` when unreachable.
fn floyd_warshall(g: &IntersectionGraph) -> Vec<Vec<u64>> {
    let n = g.n();
    let inf = u64::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0;
    }
    for (u, v) in g.edges() {
        d[u][v] = 1;
        d[v][u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    d
}

/// Doubled four-point δ over every ordered quadruple of `vertices`.
fn enumerate_quadruples(d: &[Vec<u64>], vertices: &[usize]) -> u64 {
    let mut best = 0;
    for &x in vertices {
        for &y in vertices {
            for &z in vertices {
                for &w in vertices {
                    let mut s = [d[x][y] + d[z][w], d[x][z] + d[y][w], d[x][w] + d[y][z]];
                    s.sort_unstable();
                    best = best.max(s[2] - s[1]);
                }
            }
        }
    }
    best
}

/// Labelled tree from a Prüfer sequence over `0..len+2`.
fn prufer_tree(seq: &[usize]) -> IntersectionGraph {
    let n = seq.len() + 2;
    let mut degree = vec![1; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::new();
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let ends: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((ends[0], ends[1]));
    IntersectionGraph::from_edges(n, edges).unwrap()
}

fn four_point_oracle() -> Verdict {
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for (i, g) in small_corpus().iter().enumerate() {
        let d = floyd_warshall(g);
        let labels = components(g);
        for c in 0..labels.count() {
            let members = labels.members(c);
            let want = enumerate_quadruples(&d, &members);
            let got = four_point_delta(g, Some(c), 600).unwrap();
            let naive = four_point_delta_naive(g, Some(c)).unwrap();
            checked += 1;
            if got.twice() != want || naive.twice() != want {
                mismatches.push(format!("graph {i} component {c}"));
            }
        }
    }
    let c4 = rig_core::graph_core::generators::cycle(4);
    let c5 = rig_core::graph_core::generators::cycle(5);
    let cycles_ok = four_point_delta(&c4, None, 600).unwrap() == HalfInteger::from_integer(1)
        && four_point_delta(&c5, None, 600).unwrap() == HalfInteger::from_twice(1);

    let mut trees = 0;
    let mut tree_failures = 0;
    for n in 2..=7usize {
        let len = n - 2;
        let total = n.pow(len as u32);
        for code in 0..total {
            let mut c = code;
            let seq: Vec<usize> = (0..len)
                .map(|_| {
                    let s = c % n;
                    c /= n;
                    s
                })
                .collect();
            let t = prufer_tree(&seq);
            trees += 1;
            if four_point_delta(&t, None, 600).unwrap() != HalfInteger::ZERO {
                tree_failures += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let n = rng.random_range(8..300);
        let parents: Vec<usize> = (0..n).map(|_| rng.random_range(0..1_000_000)).collect();
        trees += 1;
        if four_point_delta(&tree_from_parents(&parents), None, 600).unwrap() != HalfInteger::ZERO {
            tree_failures += 1;
        }
    }
    verdict(
        mismatches.is_empty() && cycles_ok && tree_failures == 0,
        format!(
            "{checked} components from 200 graphs, {} mismatches; C4/C5 {}; {trees} trees, {tree_failures} nonzero",
            mismatches.len(),
            if cycles_ok { "ok" } else { "wrong" }
        ),
    )
}

fn special_path_certificates() -> Verdict {
    let mut problems = Vec::new();
    for k in [4usize, 8, 16] {
        let g = theta(&[k, 2, 3]);
        let planted: Vec<usize> = std::iter::once(0).chain(2..=k).chain(std::iter::once(1)).collect();
        let found = find_k_special_paths(&g);
        let hit = found.iter().find(|p| p.path == planted);
        match hit {
            None => problems.push(format!("k={k}: planted arm not found")),
            Some(p) if p.k != k || p.certificate() != k / 4 || certificate_from_special_path(k) != k / 4 => {
                problems.push(format!("k={k}: got k={} certificate {}", p.k, p.certificate()))
            }
            Some(_) => {}
        }
        if found.first().map(|p| p.k) != Some(k) {
            problems.push(format!("k={k}: planted arm is not the best path"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut tree_hits = 0;
    for _ in 0..50 {
        let n = rng.random_range(2..400);
        let parents: Vec<usize> = (0..n).map(|_| rng.random_range(0..1_000_000)).collect();
        if !find_k_special_paths(&tree_from_parents(&parents)).is_empty() {
            tree_hits += 1;
        }
    }
    if tree_hits > 0 {
        problems.push(format!("{tree_hits} of 50 trees had special paths"));
    }
    let detail = if problems.is_empty() {
        "theta arms 4/8/16 found with certificates 1/2/4; no paths in 50 random trees".to_string()
    } else {
        problems.join("; ")
    };
    verdict(problems.is_empty(), detail)
}

fn hyperbolicity_growth() -> Verdict {
    let r = run_experiment(&preset("hyperbolicity-growth").unwrap()).unwrap();
    let medians: Vec<String> = r
        .config
        .n_values
        .iter()
        .map(|&n| format!("n={n}: {}", medians_of(&r, n, "hyperbolicity_lower_bound")))
        .collect();
    let (lo, hi) = (
        medians_of(&r, 500, "hyperbolicity_lower_bound"),
        medians_of(&r, 8000, "hyperbolicity_lower_bound"),
    );
    verdict(hi > lo, format!("median max(certificate, delta) {}", medians.join(", ")))
}

fn brute_density(g: &IntersectionGraph) -> Ratio<u64> {
    let edges: Vec<(usize, usize)> = g.edges().collect();
    (1u32..1 << g.n())
        .map(|mask| {
            let e = edges.iter().filter(|&&(u, v)| mask >> u & 1 == 1 && mask >> v & 1 == 1).count();
            Ratio::new(e as u64, mask.count_ones() as u64)
        })
        .max()
        .unwrap()
}

fn densest_exactness() -> Verdict {
    let corpus = small_corpus();
    let mut mismatches = 0;
    let mut degeneracy_violations = 0;
    let mut check_degeneracy = |g: &IntersectionGraph, density: Ratio<u64>| {
        let twice = density * 2;
        let ceiling = twice.numer().div_ceil(*twice.denom()) as usize;
        if core_decomposition(g).degeneracy > ceiling {
            degeneracy_violations += 1;
        }
    };
    for g in &corpus {
        let got = densest_subgraph(g).unwrap().density;
        if got != brute_density(g) {
            mismatches += 1;
        }
        check_degeneracy(g, got);
    }
    let mut larger = 0;
    for (alpha, beta, gamma, n) in [(1.5, 0.1, 5.0, 500), (1.5, 0.1, 5.0, 2000), (0.5, 1.0, 1.0, 1000), (1.0, 2.0, 1.2, 2000)] {
        for seed in 0..3 {
            let g = project(&sample_bipartite(&derive_params(alpha, beta, gamma, n, seed).unwrap()).unwrap());
            check_degeneracy(&g, densest_subgraph(&g).unwrap().density);
            larger += 1;
        }
    }
    verdict(
        mismatches == 0 && degeneracy_violations == 0,
        format!(
            "{} small graphs, {mismatches} density mismatches; degeneracy bound violated {degeneracy_violations} times over {} graphs",
            corpus.len(),
            corpus.len() + larger
        ),
    )
}

fn concentration() -> Verdict {
    let r = run_experiment(&preset("concentration").unwrap()).unwrap();
    let within = r
        .row(5000, "concentration_within_s50")
        .unwrap()
        .values
        .iter()
        .filter(|&&v| v == 1.0)
        .count();
    let lower = r.row(5000, "concentration_lower_s50").unwrap().values.iter().filter(|&&v| v == 1.0).count();
    let upper = r.row(5000, "concentration_upper_s50").unwrap().values.iter().filter(|&&v| v == 1.0).count();
    verdict(
        within >= 45,
        format!("both bounds in {within}/50 trials (lower {lower}, upper {upper}); need 45"),
    )
}

fn rig(dir: &Path, args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_rig"))
        .args(args)
        .current_dir(dir)
        .stdout(Stdio::null())
        .status()
        .expect("rig runs")
        .code()
        .unwrap_or(-1)
}

fn cli_determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(
        dir.join("cfg.json"),
        r#"{"name":"det","alpha":1.5,"beta":0.1,"gamma":5.0,"n_values":[200,400],"trials":3,"base_seed":9,
            "measurements":{"degeneracy":true,"max_attr_degree":true,"grad0":true,"coloring_k":[2,3],
            "four_point_delta":true,"special_certificate":true,
            "concentration":{"epsilon":0.2,"subset_sizes":[20]},"degree_tail":[1,2,4]}}"#,
    )
    .unwrap();
    let runs: [(&str, &[&str], &[&str]); 7] = [
        (
            "generate",
            &["generate", "--alpha", "1.5", "--beta", "0.1", "--gamma", "5", "--n", "1000", "--seed", "1", "-o", "b.txt"],
            &["b.txt"],
        ),
        ("project", &["project", "--bipartite", "b.txt", "-o", "g.txt"], &["g.txt"]),
        (
            "analyze",
            &["analyze", "--graph", "g.txt", "--bipartite", "b.txt", "-o", "a.json"],
            &["a.json"],
        ),
        ("color", &["color", "--graph", "g.txt", "--k", "3", "-o", "c.json"], &["c.json"]),
        (
            "verify",
            &["verify", "--graph", "g.txt", "--coloring", "c.json", "-o", "v.json"],
            &["v.json"],
        ),
        ("hyperbolicity", &["hyperbolicity", "--graph", "g.txt", "--size-cap", "2000", "-o", "h.json"], &["h.json"]),
        ("experiment", &["experiment", "--config", "cfg.json", "-o", "results"], &[]),
    ];
    let mut problems = Vec::new();
    for (name, args, files) in runs {
        let mut snapshots = Vec::new();
        for _ in 0..2 {
            let code = rig(dir, args);
            if code != 0 {
                problems.push(format!("{name} exited {code}"));
            }
            let bytes: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(dir.join(f)).unwrap_or_default()).collect();
            snapshots.push(bytes);
        }
        if snapshots[0] != snapshots[1] || snapshots[0].iter().any(|b| b.is_empty()) {
            problems.push(format!("{name} output differs or is empty"));
        }
    }
    let mut runs: Vec<_> = std::fs::read_dir(dir.join("results/det"))
        .map(|it| it.map(|e| e.unwrap().path()).collect())
        .unwrap_or_default();
    runs.sort();
    if runs.len() != 2 {
        problems.push(format!("expected 2 experiment runs, found {}", runs.len()));
    } else {
        for f in ["summary.csv", "trials.json"] {
            let a = std::fs::read(runs[0].join(f)).unwrap_or_default();
            let b = std::fs::read(runs[1].join(f)).unwrap_or_default();
            if a != b || a.is_empty() {
                problems.push(format!("experiment {f} differs or is empty"));
            }
        }
    }
    let detail = if problems.is_empty() {
        "7 subcommands run twice, primary outputs byte-identical".to_string()
    } else {
        problems.join("; ")
    };
    verdict(problems.is_empty(), detail)
}

type Criterion = (u32, &'static str, Duration, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "degeneracy growth for alpha < 1", minutes(5), degeneracy_alpha_half),
        (2, "bounded degeneracy for alpha > 1", minutes(5), bounded_alpha_three_halves),
        (3, "coloring sizes flatten", minutes(15), coloring_flattening),
        (4, "coloring validity", minutes(10), coloring_validity),
        (5, "four-point oracle equivalence", minutes(1), four_point_oracle),
        (6, "special-path certificates", minutes(1), special_path_certificates),
        (7, "hyperbolicity growth", minutes(20), hyperbolicity_growth),
        (8, "densest subgraph exactness", minutes(2), densest_exactness),
        (9, "neighbourhood concentration", minutes(2), concentration),
        (10, "CLI determinism", minutes(5), cli_determinism),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (id, name, limit, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let pass = v.pass && elapsed <= limit;
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.1}s of {}s]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        if !pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: {} failed: {:?}", failed.len(), failed);
        std::process::exit(1);
    }
    println!("acceptance: all selected criteria passed");
}
