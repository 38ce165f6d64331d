//! `rig` command line.
//!
//! Exit codes: 0 success, 1 invalid input or I/O failure, 2 a size cap was
//! exceeded, 3 a coloring failed verification.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coloring::{self, ColoringResult, DEFAULT_SAMPLES, DEFAULT_VERIFY_CAP};
use crate::error::{Result, RigError};
use crate::experiments::{self, ExperimentConfig};
use crate::hyperbolicity::{self, DEFAULT_FOUR_POINT_CAP};
use crate::io;
use crate::model::{self, ModelParams};
use crate::parallel;
use crate::sparsity::{self, DEFAULT_TAIL_THRESHOLDS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_CAP: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rig", version, about = "Random intersection graph toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a bipartite incidence graph.
    Generate(GenerateArgs),
    /// Project a bipartite graph onto its nodes.
    Project(ProjectArgs),
    /// Sparsity report as JSON.
    Analyze(AnalyzeArgs),
    /// Low-treewidth coloring, verified on sampled class unions.
    Color(ColorArgs),
    /// Four-point δ of the giant component and special-path certificate.
    Hyperbolicity(HyperbolicityArgs),
    /// Run a sweep from a JSON config or a named preset.
    Experiment(ExperimentArgs),
    /// Re-verify a stored coloring.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, requires = "p", conflicts_with_all = ["alpha", "beta", "gamma"])]
    m: Option<usize>,
    #[arg(long, requires = "m")]
    p: Option<f64>,
    #[arg(long, requires_all = ["beta", "gamma"])]
    alpha: Option<f64>,
    #[arg(long, requires_all = ["alpha", "gamma"])]
    beta: Option<f64>,
    #[arg(long, requires_all = ["alpha", "beta"])]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ProjectArgs {
    #[arg(long)]
    bipartite: PathBuf,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long, required_unless_present = "bipartite")]
    graph: Option<PathBuf>,
    /// Supplies attribute degrees; projected when no graph is given.
    #[arg(long)]
    bipartite: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<usize>>,
    /// Also check neighbourhood concentration of a random node subset.
    #[arg(long, requires_all = ["bipartite", "subset_size", "p"])]
    epsilon: Option<f64>,
    #[arg(long, requires = "epsilon")]
    subset_size: Option<usize>,
    /// Attribute probability the bipartite graph was sampled with.
    #[arg(long, requires = "epsilon")]
    p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyOpts {
    /// Class subsets checked per subset size.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Largest reduced union handed to the exact treewidth search.
    #[arg(long, default_value_t = DEFAULT_VERIFY_CAP)]
    size_cap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ColorArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    verify: VerifyOpts,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct HyperbolicityArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Largest giant component for the exact four-point δ.
    #[arg(long, default_value_t = DEFAULT_FOUR_POINT_CAP)]
    size_cap: usize,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Overrides the configured trial count.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Results root; a fresh `<name>/<timestamp>` directory is created inside.
    #[arg(short = 'o', long = "output", default_value = "results")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    coloring: PathBuf,
    #[command(flatten)]
    verify: VerifyOpts,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

enum Outcome {
    Done,
    VerificationFailed(usize),
}

fn emit_json(value: &impl serde::Serialize, output: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn generate(a: GenerateArgs) -> Result<Outcome> {
    let params = match (a.m, a.p, a.alpha, a.beta, a.gamma) {
        (Some(m), Some(p), None, None, None) => ModelParams::new(a.n, m, p, a.seed)?,
        (None, None, Some(alpha), Some(beta), Some(gamma)) => model::derive_params(alpha, beta, gamma, a.n, a.seed)?,
        _ => return Err(RigError::invalid("give either --m and --p, or --alpha, --beta and --gamma")),
    };
    io::write_bipartite(&a.output, &model::sample_bipartite(&params)?)?;
    Ok(Outcome::Done)
}

fn analyze(a: AnalyzeArgs) -> Result<Outcome> {
    let b = a.bipartite.as_deref().map(io::read_bipartite).transpose()?;
    let g = match (&a.graph, &b) {
        (Some(path), _) => io::read_graph(path)?,
        (None, Some(b)) => model::project(b),
        (None, None) => unreachable!("clap requires one input"),
    };
    if let Some(b) = &b {
        if b.n_nodes() != g.n() {
            return Err(RigError::Mismatch(format!(
                "bipartite graph has {} nodes, graph has {} vertices",
                b.n_nodes(),
                g.n()
            )));
        }
    }
    let thresholds = a.thresholds.unwrap_or_else(|| DEFAULT_TAIL_THRESHOLDS.to_vec());
    let mut json = sparsity::analyze(&g, b.as_ref(), &thresholds).to_json_value();
    if let (Some(eps), Some(size), Some(p), Some(b)) = (a.epsilon, a.subset_size, a.p, &b) {
        if size > b.n_nodes() {
            return Err(RigError::invalid(format!("subset size {size} exceeds n = {}", b.n_nodes())));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let subset = rand::seq::index::sample(&mut rng, b.n_nodes(), size).into_vec();
        let check = sparsity::concentration_check(b, &subset, p, eps)?;
        json["concentration"] = serde_json::to_value(check)?;
    }
    emit_json(&json, a.output.as_deref())?;
    Ok(Outcome::Done)
}

fn verified(result: &ColoringResult) -> Outcome {
    let failed = result.verification.iter().filter(|r| r.failed()).count();
    if failed > 0 {
        Outcome::VerificationFailed(failed)
    } else {
        Outcome::Done
    }
}

fn color(a: ColorArgs) -> Result<Outcome> {
    let g = io::read_graph(&a.graph)?;
    let mut result = coloring::low_tw_coloring(&g, a.k)?;
    result.verification = coloring::verify_coloring(&g, &result, a.verify.samples, a.verify.size_cap, a.verify.seed)?;
    emit_json(&result, a.output.as_deref())?;
    Ok(verified(&result))
}

fn verify(a: VerifyArgs) -> Result<Outcome> {
    let g = io::read_graph(&a.graph)?;
    let mut result: ColoringResult = serde_json::from_str(&fs::read_to_string(&a.coloring)?)?;
    result.verification = coloring::verify_coloring(&g, &result, a.verify.samples, a.verify.size_cap, a.verify.seed)?;
    emit_json(&result.verification, a.output.as_deref())?;
    Ok(verified(&result))
}

fn hyperbolicity(a: HyperbolicityArgs) -> Result<Outcome> {
    let g = io::read_graph(&a.graph)?;
    let report = hyperbolicity::hyperbolicity_report(&g, a.size_cap)?;
    emit_json(&report.to_json_value(), a.output.as_deref())?;
    Ok(Outcome::Done)
}

fn experiment(a: ExperimentArgs) -> Result<Outcome> {
    let mut config: ExperimentConfig = match (&a.config, &a.preset) {
        (Some(path), _) => serde_json::from_str(&fs::read_to_string(path)?)?,
        (None, Some(name)) => experiments::preset(name)?,
        (None, None) => unreachable!("clap requires one source"),
    };
    if let Some(t) = a.trials {
        config.trials = t;
    }
    if let Some(s) = a.seed {
        config.base_seed = s;
    }
    let result = experiments::run_experiment(&config)?;
    let dir = experiments::write_outputs(&result, &a.output)?;
    println!("{}", dir.display());
    Ok(Outcome::Done)
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Project(a) => {
            io::write_graph(&a.output, &model::project(&io::read_bipartite(&a.bipartite)?))?;
            Ok(Outcome::Done)
        }
        Command::Analyze(a) => analyze(a),
        Command::Color(a) => color(a),
        Command::Hyperbolicity(a) => hyperbolicity(a),
        Command::Experiment(a) => experiment(a),
        Command::Verify(a) => verify(a),
    }
}

fn configure_from_env() -> Result<()> {
    if let Ok(raw) = std::env::var("RIG_THREADS") {
        let threads: usize = raw
            .trim()
            .parse()
            .map_err(|_| RigError::invalid(format!("RIG_THREADS must be a count, got `{raw}`")))?;
        parallel::configure_threads(threads);
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit code. Errors go to stderr prefixed with `error:`.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return EXIT_OK;
        }
        Err(e) => {
            let text = e.render().to_string();
            let text = text.strip_prefix("error: ").unwrap_or(&text);
            eprint!("error: {text}");
            return EXIT_INVALID;
        }
    };
    let outcome = configure_from_env().and_then(|()| dispatch(cli.command));
    match outcome {
        Ok(Outcome::Done) => EXIT_OK,
        Ok(Outcome::VerificationFailed(count)) => {
            eprintln!("error: {count} verification record(s) failed");
            EXIT_VERIFY
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                RigError::CapExceeded { .. } => EXIT_CAP,
                _ => EXIT_INVALID,
            }
        }
    }
}
