//! Seeded parameter sweeps with median aggregation.
//!
//! Trial `t` of every `n` uses seed `base_seed + t`. Measurements that need
//! their own randomness (subset samples, verification draws) seed a private
//! generator from the trial seed XOR a fixed salt, so any cell can be redone
//! from `(config, n, trial)` alone.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coloring::{low_tw_coloring, verify_coloring, DEFAULT_VERIFY_CAP};
use crate::error::{Result, RigError};
use crate::graph_core::{components, core_decomposition};
use crate::hyperbolicity::{
    find_k_special_paths, four_point_delta, four_point_delta_sampled, DEFAULT_FOUR_POINT_CAP,
};
use crate::model::{derive_params, project, sample_bipartite, ModelParams};
use crate::parallel;
use crate::sparsity::{attribute_degree_stats, concentration_check, degree_tail, densest_subgraph};

const SALT_CONCENTRATION: u64 = 0x636f_6e63_656e_7472;
const SALT_FOUR_POINT: u64 = 0x6675_7270_6f69_6e74;
const SALT_VERIFY: u64 = 0x7665_7269_6679_0000;

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationPlan {
    pub epsilon: f64,
    pub subset_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Measurements {
    pub degeneracy: bool,
    pub max_attr_degree: bool,
    pub grad0: bool,
    pub four_point_delta: bool,
    pub special_certificate: bool,
    pub giant_size: bool,
    pub coloring_k: Vec<usize>,
    /// When set, each coloring is also verified with this many class
    /// subsets per size and the failing records are counted.
    pub coloring_verify_samples: Option<usize>,
    pub concentration: Option<ConcentrationPlan>,
    pub degree_tail: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Caps {
    /// Largest giant component for the exact four-point δ.
    pub four_point: usize,
    /// Above the cap, δ is taken over this many sampled giant vertices
    /// (a lower bound). Unset means the cell is skipped.
    pub four_point_sample: Option<usize>,
    /// Largest graph (vertices) handed to the densest-subgraph solver.
    pub grad0: usize,
    pub verify_size: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            four_point: DEFAULT_FOUR_POINT_CAP,
            four_point_sample: None,
            grad0: 50_000,
            verify_size: DEFAULT_VERIFY_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    #[serde(default)]
    pub measurements: Measurements,
    #[serde(default)]
    pub caps: Caps,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(RigError::InvalidParameter(msg));
        if self.name.is_empty() || self.name.contains(['/', '\\']) || self.name == ".." {
            return invalid(format!("bad experiment name `{}`", self.name));
        }
        for (what, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("{what} must be positive, got {v}"));
            }
        }
        if self.trials == 0 {
            return invalid("trials must be at least 1".into());
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("n_values must be strictly increasing".into());
        }
        if self.n_values.first() == Some(&0) {
            return invalid("n must be positive".into());
        }
        if self.measurements.coloring_k.contains(&0) {
            return invalid("coloring k must be at least 1".into());
        }
        if let Some(c) = &self.measurements.concentration {
            if !(c.epsilon > 0.0 && c.epsilon < 1.0) {
                return invalid(format!("epsilon must lie in (0, 1), got {}", c.epsilon));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SomewhereDenseExpected,
    BoundedExpansionExpected,
}

pub fn regime_classifier(alpha: f64) -> Result<Regime> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(RigError::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    Ok(if alpha <= 1.0 {
        Regime::SomewhereDenseExpected
    } else {
        Regime::BoundedExpansionExpected
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub measurement: String,
    /// `None` when the measurement was skipped.
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Cell {
    fn value(measurement: impl Into<String>, value: f64) -> Self {
        Cell {
            measurement: measurement.into(),
            value: Some(value),
            note: None,
        }
    }

    fn skipped(measurement: impl Into<String>, why: String) -> Self {
        Cell {
            measurement: measurement.into(),
            value: None,
            note: Some(why),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub m: usize,
    pub p: f64,
    pub cells: Vec<Cell>,
}

impl TrialRecord {
    pub fn get(&self, measurement: &str) -> Option<f64> {
        self.cells.iter().find(|c| c.measurement == measurement).and_then(|c| c.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub measurement: String,
    pub median: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Non-skipped trial values in trial order.
    pub values: Vec<f64>,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub code_version: String,
    pub regime: Regime,
    pub rows: Vec<SummaryRow>,
    pub trials: Vec<TrialRecord>,
}

impl ExperimentResult {
    pub fn row(&self, n: usize, measurement: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.n == n && r.measurement == measurement)
    }

    pub fn median(&self, n: usize, measurement: &str) -> Option<f64> {
        self.row(n, measurement).and_then(|r| r.median)
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("n,measurement,median,min,max\n");
        let fmt = |v: Option<f64>| v.map_or_else(|| "skipped".to_string(), |v| v.to_string());
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{}", r.n, r.measurement, fmt(r.median), fmt(r.min), fmt(r.max)).unwrap();
        }
        out
    }
}

/// Median of a non-empty set; even counts average the middle pair.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { (v[mid - 1] + v[mid]) / 2.0 })
}

fn measure_trial(config: &ExperimentConfig, params: &ModelParams) -> Result<Vec<Cell>> {
    let ms = &config.measurements;
    let caps = &config.caps;
    let seed = params.seed;
    let b = sample_bipartite(params)?;
    let g = project(&b);
    let mut cells = Vec::new();

    if ms.degeneracy {
        cells.push(Cell::value("degeneracy", core_decomposition(&g).degeneracy as f64));
    }
    if ms.max_attr_degree {
        cells.push(Cell::value("max_attr_degree", attribute_degree_stats(&b).max_degree as f64));
    }
    if ms.grad0 {
        cells.push(if g.n() > caps.grad0 {
            Cell::skipped("grad0", format!("{} vertices exceed cap {}", g.n(), caps.grad0))
        } else {
            let d = densest_subgraph(&g).map_or(0.0, |d| *d.density.numer() as f64 / *d.density.denom() as f64);
            Cell::value("grad0", d)
        });
    }
    let labels = components(&g);
    if ms.giant_size {
        cells.push(Cell::value("giant_size", labels.giant_size() as f64));
    }
    let mut lower_bound: Option<f64> = None;
    if ms.four_point_delta {
        let giant_size = labels.giant_size();
        let cell = match labels.giant {
            None => Cell::value("four_point_delta", 0.0),
            Some(giant) if giant_size <= caps.four_point => {
                Cell::value("four_point_delta", four_point_delta(&g, Some(giant), caps.four_point)?.as_f64())
            }
            Some(giant) => match caps.four_point_sample {
                Some(k) => {
                    let d = four_point_delta_sampled(&g, Some(giant), k, seed ^ SALT_FOUR_POINT)?;
                    Cell {
                        note: Some(format!("lower bound from {k} of {giant_size} giant vertices")),
                        ..Cell::value("four_point_delta", d.as_f64())
                    }
                }
                None => Cell::skipped(
                    "four_point_delta",
                    format!("giant of {giant_size} exceeds cap {}", caps.four_point),
                ),
            },
        };
        lower_bound = cell.value;
        cells.push(cell);
    }
    if ms.special_certificate {
        let best = find_k_special_paths(&g).into_iter().next();
        let cert = best.as_ref().map_or(0, |p| p.certificate()) as f64;
        cells.push(Cell::value("special_k", best.map_or(0, |p| p.k) as f64));
        cells.push(Cell::value("special_certificate", cert));
        lower_bound = Some(lower_bound.map_or(cert, |d| d.max(cert)));
    }
    if ms.four_point_delta && ms.special_certificate {
        if let Some(v) = lower_bound {
            cells.push(Cell::value("hyperbolicity_lower_bound", v));
        }
    }
    for &k in &ms.coloring_k {
        let result = low_tw_coloring(&g, k)?;
        cells.push(Cell::value(format!("colors_k{k}"), result.num_colors as f64));
        if let Some(samples) = ms.coloring_verify_samples {
            let records = verify_coloring(&g, &result, samples, caps.verify_size, seed ^ SALT_VERIFY ^ k as u64)?;
            let failed = records.iter().filter(|r| r.failed()).count();
            let skipped = records.iter().filter(|r| r.skipped()).count();
            cells.push(Cell::value(format!("verify_failures_k{k}"), failed as f64));
            cells.push(Cell::value(format!("verify_skipped_k{k}"), skipped as f64));
        }
    }
    if let Some(plan) = &ms.concentration {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SALT_CONCENTRATION);
        for &size in &plan.subset_sizes {
            let name = |what: &str| format!("concentration_{what}_s{size}");
            if size > b.n_nodes() {
                let why = format!("subset size {size} exceeds n = {}", b.n_nodes());
                for what in ["lower", "upper", "within"] {
                    cells.push(Cell::skipped(name(what), why.clone()));
                }
                continue;
            }
            let subset = rand::seq::index::sample(&mut rng, b.n_nodes(), size).into_vec();
            let check = concentration_check(&b, &subset, params.p, plan.epsilon)?;
            cells.push(Cell::value(name("lower"), check.within_lower as u8 as f64));
            cells.push(Cell::value(name("upper"), check.within_upper as u8 as f64));
            cells.push(Cell::value(name("within"), check.within() as u8 as f64));
        }
    }
    if !ms.degree_tail.is_empty() {
        for (d, frac) in degree_tail(&g, &ms.degree_tail) {
            cells.push(Cell::value(format!("degree_tail_{d}"), frac));
        }
    }
    Ok(cells)
}

/// Runs every `(n, trial)` cell and aggregates per-`n` medians.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let regime = regime_classifier(config.alpha)?;
    let jobs: Vec<(usize, usize)> = config
        .n_values
        .iter()
        .flat_map(|&n| (0..config.trials).map(move |t| (n, t)))
        .collect();
    let trials = parallel::map_slice(&jobs, |&(n, trial)| -> Result<TrialRecord> {
        let seed = config.trial_seed(trial);
        let params = derive_params(config.alpha, config.beta, config.gamma, n, seed)?;
        Ok(TrialRecord {
            n,
            trial,
            seed,
            m: params.m,
            p: params.p,
            cells: measure_trial(config, &params)?,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for &n in &config.n_values {
        let of_n: Vec<&TrialRecord> = trials.iter().filter(|t| t.n == n).collect();
        let Some(first) = of_n.first() else { continue };
        for name in first.cells.iter().map(|c| &c.measurement) {
            let cells: Vec<&Cell> = of_n
                .iter()
                .filter_map(|t| t.cells.iter().find(|c| &c.measurement == name))
                .collect();
            let values: Vec<f64> = cells.iter().filter_map(|c| c.value).collect();
            rows.push(SummaryRow {
                n,
                measurement: name.clone(),
                median: median(&values),
                min: values.iter().copied().reduce(f64::min),
                max: values.iter().copied().reduce(f64::max),
                skipped: cells.len() - values.len(),
                values,
            });
        }
    }
    Ok(ExperimentResult {
        config: config.clone(),
        config_hash: config.hash(),
        code_version: CODE_VERSION.to_string(),
        regime,
        rows,
        trials,
    })
}

/// Writes `summary.csv` and `trials.json` into a fresh
/// `<root>/<name>/<timestamp>` directory and returns it.
pub fn write_outputs(result: &ExperimentResult, root: &Path) -> Result<PathBuf> {
    let base = root.join(&result.config.name);
    fs::create_dir_all(&base)?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
    let mut dir = base.join(&stamp);
    let mut attempt = 1;
    while dir.exists() {
        dir = base.join(format!("{stamp}-{attempt}"));
        attempt += 1;
    }
    fs::create_dir(&dir)?;
    fs::write(dir.join("summary.csv"), result.summary_csv())?;
    let mut json = serde_json::to_string_pretty(result)?;
    json.push('\n');
    fs::write(dir.join("trials.json"), json)?;
    Ok(dir)
}

pub const PRESET_NAMES: [&str; 6] = [
    "fig-expdata-desk",
    "degen-alpha-0.5",
    "degen-alpha-1.5",
    "coloring-validity",
    "hyperbolicity-growth",
    "concentration",
];

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let make = |alpha, beta, gamma, n_values: &[usize], trials, measurements| ExperimentConfig {
        name: name.to_string(),
        alpha,
        beta,
        gamma,
        n_values: n_values.to_vec(),
        trials,
        base_seed: 1,
        measurements,
        caps: Caps::default(),
    };
    let desk_n = [500, 1000, 2000, 4000, 8000];
    Ok(match name {
        "fig-expdata-desk" => make(
            1.5,
            0.1,
            5.0,
            &desk_n,
            10,
            Measurements {
                coloring_k: vec![2, 3, 4, 5],
                ..Default::default()
            },
        ),
        "degen-alpha-0.5" => make(
            0.5,
            1.0,
            1.0,
            &[1000, 4000, 16000],
            20,
            Measurements {
                degeneracy: true,
                ..Default::default()
            },
        ),
        "degen-alpha-1.5" => make(
            1.5,
            0.1,
            5.0,
            &desk_n,
            10,
            Measurements {
                degeneracy: true,
                max_attr_degree: true,
                ..Default::default()
            },
        ),
        "coloring-validity" => make(
            1.5,
            0.1,
            5.0,
            &[2000],
            10,
            Measurements {
                coloring_k: vec![2, 3],
                coloring_verify_samples: Some(100),
                ..Default::default()
            },
        ),
        "hyperbolicity-growth" => {
            let mut c = make(
                1.0,
                2.0,
                1.2,
                &[500, 2000, 8000],
                10,
                Measurements {
                    four_point_delta: true,
                    special_certificate: true,
                    giant_size: true,
                    ..Default::default()
                },
            );
            c.caps.four_point_sample = Some(200);
            c
        }
        "concentration" => make(
            1.5,
            0.1,
            5.0,
            &[5000],
            50,
            Measurements {
                concentration: Some(ConcentrationPlan {
                    epsilon: 0.1,
                    subset_sizes: vec![50],
                }),
                ..Default::default()
            },
        ),
        other => {
            return Err(RigError::InvalidParameter(format!(
                "unknown preset `{other}` (known: {})",
                PRESET_NAMES.join(", ")
            )))
        }
    })
}
