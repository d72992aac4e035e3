//! Batch driver: reads a JSON config, runs one solve or study, and writes a
//! JSON report, a CSV table and a timestamped sidecar log named after the
//! report's content hash.
//!
//! Exit codes: 0 on success, 2 when the config cannot be read or fails
//! validation (nothing is written), 1 when a numerical stage fails.

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use steklov_lab::eigensolve::{solve_on_mesh, SpectralResult};
use steklov_lab::experiments::{
    continuity_study, convergence_study, divergence_study, singularity_fit, stability_sweep, ContinuityConfig,
    ConvergenceConfig, DivergenceConfig, SingularityConfig, StabilityConfig, StudyReport,
};
use steklov_lab::geometry::{ArcSet, BoundaryCurve};
use steklov_lab::meshing::{mesh_domain, MeshQuality};
use steklov_lab::optimizer::{optimize_arcs, OptimConfig};
use steklov_lab::provenance::{content_hash, Provenance};
use steklov_lab::{Error, Execution};

#[derive(Parser, Debug)]
#[command(name = "steklov", version, about = "Mixed Steklov-Dirichlet eigenvalue solver and studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenpairs for one configuration.
    Solve(Common),
    /// Eigenvalue response to endpoint perturbations.
    Stability(Common),
    /// First eigenvalue for equally spaced arcs of growing count.
    Diverge(Common),
    /// Growth exponent of the first eigenfunction at an interface point.
    Singularity(Common),
    /// Eigenvalues along a sequence converging to a target configuration.
    Continuity(Common),
    /// Refinement table with Richardson extrapolation.
    Converge(Common),
    /// Extremal eigenvalue over arc configurations.
    Optimize(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed of randomized commands.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the summary on stdout.
    #[arg(long)]
    quiet: bool,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
}

/// Config of the `solve` command.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub arcs: ArcSet,
    pub h: f64,
    pub k: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub config: SolveConfig,
    pub settings_hash: String,
    pub quality: MeshQuality,
    pub result: SpectralResult,
}

/// Config of the `optimize` command: the curve plus the search settings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizeConfig {
    pub curve: BoundaryCurve,
    #[serde(flatten)]
    pub search: OptimConfig,
}

struct Failure {
    code: i32,
    message: String,
}

fn config_error(path: &Path, e: impl Display) -> Failure {
    Failure { code: 2, message: format!("invalid config {}: {e}", path.display()) }
}

fn stage_error(stage: &str, e: Error) -> Failure {
    let code = match e {
        Error::Config(_) | Error::InvalidCurve(_) | Error::InvalidArcSet(_) | Error::MeshTooCoarse { .. } => 2,
        _ => 1,
    };
    Failure { code, message: format!("stage `{stage}` failed: {e}") }
}

fn parse<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| config_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| config_error(path, e))
}

/// Files produced by one command.
struct Outputs {
    json: String,
    csv: String,
    hash: String,
    summary: String,
}

impl Outputs {
    fn from_report<R: StudyReport>(r: &R, summary: String) -> Result<Self, Error> {
        Ok(Outputs { json: r.to_json()?, csv: r.csv(), hash: r.hash(), summary })
    }
}

struct Log {
    lines: Vec<String>,
}

impl Log {
    fn note(&mut self, msg: impl Display) {
        let t = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        self.lines.push(format!("[{t:.3}] {msg}"));
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (name, common) = match &cli.command {
        Command::Solve(c) => ("solve", c),
        Command::Stability(c) => ("stability", c),
        Command::Diverge(c) => ("diverge", c),
        Command::Singularity(c) => ("singularity", c),
        Command::Continuity(c) => ("continuity", c),
        Command::Converge(c) => ("converge", c),
        Command::Optimize(c) => ("optimize", c),
    };
    let mut log = Log { lines: Vec::new() };
    log.note(format_args!("command {name}, config {}", common.config.display()));
    match execute(&cli.command, common, &mut log) {
        Ok(out) => match write_outputs(name, common, &out, &mut log) {
            Ok(paths) => {
                if !common.quiet {
                    println!("{}", out.summary);
                    for p in paths {
                        println!("wrote {}", p.display());
                    }
                }
                0
            }
            Err(f) => {
                eprintln!("{}", f.message);
                f.code
            }
        },
        Err(f) => {
            eprintln!("{}", f.message);
            f.code
        }
    }
}

fn execute(command: &Command, common: &Common, log: &mut Log) -> Result<Outputs, Failure> {
    let exec = if common.sequential { Execution::Sequential } else { Execution::default() };
    let path = common.config.as_path();
    let out = match command {
        Command::Solve(_) => {
            let cfg: SolveConfig = parse(path)?;
            log.note("config parsed");
            let curve = cfg.arcs.curve().clone();
            let mesh = mesh_domain(&curve, &cfg.arcs, cfg.h).map_err(|e| stage_error("meshing", e))?;
            log.note(format_args!("mesh with {} vertices", mesh.num_vertices()));
            let quality = mesh.quality();
            let mut result = solve_on_mesh(Arc::new(mesh), cfg.k, exec).map_err(|e| stage_error("eigensolve", e))?;
            result.provenance =
                Provenance::new(&cfg.arcs, Some(cfg.h), 0, result.provenance.vertices, result.provenance.triangles);
            let csv = result.eigenvector_csv();
            let summary = format!("lambda = {:?}", result.lambda);
            let report = SolveReport { settings_hash: content_hash(&cfg), config: cfg, quality, result };
            let mut json = serde_json::to_string_pretty(&report).map_err(|e| stage_error("serialize", e.into()))?;
            json.push('\n');
            Outputs { hash: content_hash(&report), json, csv, summary }
        }
        Command::Stability(_) => {
            let cfg: StabilityConfig = parse(path)?;
            log.note("config parsed");
            let r = stability_sweep(&cfg, exec).map_err(|e| stage_error("stability sweep", e))?;
            let summary = format!(
                "slope = {:?}, constant = {:?}, envelope holds = {}",
                r.fit.map(|f| f.exponent),
                r.constant,
                r.envelope_holds
            );
            Outputs::from_report(&r, summary).map_err(|e| stage_error("serialize", e))?
        }
        Command::Diverge(_) => {
            let cfg: DivergenceConfig = parse(path)?;
            log.note("config parsed");
            let r = divergence_study(&cfg, exec).map_err(|e| stage_error("divergence study", e))?;
            let lam: Vec<f64> = r.entries.iter().map(|e| e.lambda[1]).collect();
            let summary = format!("lambda_1 = {lam:?}, min lambda_1/n = {}", r.min_ratio);
            Outputs::from_report(&r, summary).map_err(|e| stage_error("serialize", e))?
        }
        Command::Singularity(_) => {
            let cfg: SingularityConfig = parse(path)?;
            log.note("config parsed");
            let r = singularity_fit(&cfg, exec).map_err(|e| stage_error("singularity fit", e))?;
            let summary = format!("exponent = {} (log residual {})", r.fit.exponent, r.fit.residual);
            Outputs::from_report(&r, summary).map_err(|e| stage_error("serialize", e))?
        }
        Command::Continuity(_) => {
            let cfg: ContinuityConfig = parse(path)?;
            log.note("config parsed");
            let r = continuity_study(&cfg, exec).map_err(|e| stage_error("continuity study", e))?;
            let gaps: Vec<f64> = r.members.iter().map(|m| m.gap).collect();
            let summary = format!("gaps = {gaps:?}, monotone = {}", r.monotone);
            Outputs::from_report(&r, summary).map_err(|e| stage_error("serialize", e))?
        }
        Command::Converge(_) => {
            let cfg: ConvergenceConfig = parse(path)?;
            log.note("config parsed");
            let r = convergence_study(&cfg, exec).map_err(|e| stage_error("convergence study", e))?;
            let summary = format!("extrapolated = {:?}", r.extrapolated);
            Outputs::from_report(&r, summary).map_err(|e| stage_error("serialize", e))?
        }
        Command::Optimize(_) => {
            let mut cfg: OptimizeConfig = parse(path)?;
            if let Some(seed) = common.seed {
                cfg.search.seed = seed;
            }
            log.note(format_args!("config parsed, seed {}", cfg.search.seed));
            let curve = cfg.curve.clone().shared();
            let r = optimize_arcs(&curve, &cfg.search, exec).map_err(|e| stage_error("optimization", e))?;
            let summary = format!("best lambda = {} at {:?} ({})", r.best_lambda, r.best.pairs(), r.termination);
            let json = r.to_json().map_err(|e| stage_error("serialize", e))?;
            Outputs { hash: content_hash(&r), json, csv: r.incumbent_csv(), summary }
        }
    };
    log.note("compute finished");
    Ok(out)
}

fn write_outputs(name: &str, common: &Common, out: &Outputs, log: &mut Log) -> Result<Vec<PathBuf>, Failure> {
    let io = |e: std::io::Error| stage_error("write outputs", e.into());
    fs::create_dir_all(&common.out).map_err(io)?;
    let stem = format!("{name}-{}", &out.hash[..16]);
    let json = common.out.join(format!("{stem}.json"));
    let csv = common.out.join(format!("{stem}.csv"));
    let sidecar = common.out.join(format!("{stem}.log"));
    fs::write(&json, &out.json).map_err(io)?;
    fs::write(&csv, &out.csv).map_err(io)?;
    log.note(format_args!("wrote {} and {}", json.display(), csv.display()));
    let mut text = log.lines.join("\n");
    text.push('\n');
    fs::write(&sidecar, text).map_err(io)?;
    Ok(vec![json, csv, sidecar])
}
