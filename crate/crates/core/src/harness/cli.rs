//! Command-line interface: `run`, `verify`, `curves` and `list`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::engine::Preset;
use crate::error::{Error, Result};
use crate::problems::ProblemKind;

use super::curves::tidy_curves;
use super::experiment::{Experiment, ExperimentSpec, SetKind};
use super::output::{rounds_csv, summary_path, summary_text, write_atomic};
use super::verify::{verify, Suite, VerifyOptions, DEFAULT_TOLERANCE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Caps the worker threads used by `verify`.
pub const THREADS_ENV: &str = "ADAREG_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "adareg",
    version,
    about = "Adaptive regularization for online convex optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one algorithm on one problem and certify its regret bound.
    Run(RunArgs),
    /// Run the randomized verification suites.
    Verify(VerifyArgs),
    /// Merge run CSVs into a tidy `run_id,t,regret,bound` table.
    Curves(CurvesArgs),
    /// List algorithms and problems.
    List,
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// TOML file with any of the run parameters; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// ball, box or unconstrained.
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lower: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    upper: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Fixed η for pnorm; tuned in two passes when omitted.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Per-round CSV path; the summary goes next to it as `<stem>.summary.txt`.
    #[arg(long)]
    out: PathBuf,
}

/// The parameters a config file may set.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    algo: Option<String>,
    problem: Option<String>,
    dim: Option<usize>,
    horizon: Option<usize>,
    seed: Option<u64>,
    set: Option<String>,
    radius: Option<f64>,
    lower: Option<f64>,
    upper: Option<f64>,
    epsilon: Option<f64>,
    eta: Option<f64>,
    beta: Option<f64>,
    p: Option<f64>,
    alpha: Option<f64>,
    gamma: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suites to run (repeatable): lemmas, argmin, bounds, matrix or all.
    #[arg(long = "suite", default_value = "all")]
    suites: Vec<String>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Relative tolerance for numerical agreement checks.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args, Debug)]
struct CurvesArgs {
    /// Run CSVs written by `run`.
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a, stdout),
        Command::Verify(a) => cmd_verify(a, stdout),
        Command::Curves(a) => cmd_curves(a, stdout),
        Command::List => cmd_list(stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::Config(_) | Error::Validation(_) | Error::DimensionMismatch { .. } => {
                    EXIT_USAGE
                }
                _ => EXIT_FAILURE,
            }
        }
    }
}

fn load_file_config(path: &PathBuf) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn build_spec(a: &RunArgs) -> Result<ExperimentSpec> {
    let file = match &a.config {
        Some(p) => load_file_config(p)?,
        None => FileConfig::default(),
    };
    let d = ExperimentSpec::default();
    let set = match a.set.as_deref().or(file.set.as_deref()) {
        Some(s) => SetKind::from_id(s).ok_or_else(|| {
            Error::Config(format!(
                "unknown set {s:?}; expected ball, box or unconstrained"
            ))
        })?,
        None => d.set,
    };
    Ok(ExperimentSpec {
        algo: a.algo.clone().or(file.algo).ok_or_else(|| {
            Error::Config(format!(
                "--algo is required; one of {}",
                Preset::IDS.join(", ")
            ))
        })?,
        problem: a.problem.clone().or(file.problem),
        dim: a.dim.or(file.dim).unwrap_or(d.dim),
        horizon: a.horizon.or(file.horizon).unwrap_or(d.horizon),
        seed: a.seed.or(file.seed).unwrap_or(d.seed),
        set,
        radius: a.radius.or(file.radius).unwrap_or(d.radius),
        lower: a.lower.or(file.lower).unwrap_or(d.lower),
        upper: a.upper.or(file.upper).unwrap_or(d.upper),
        epsilon: a.epsilon.or(file.epsilon),
        eta: a.eta.or(file.eta),
        beta: a.beta.or(file.beta),
        p: a.p.or(file.p),
        alpha: a.alpha.or(file.alpha),
        gamma: a.gamma.or(file.gamma),
    })
}

fn cmd_run(a: RunArgs, stdout: &mut dyn Write) -> Result<i32> {
    let spec = build_spec(&a)?;
    let exp = Experiment::build(spec.clone())?;
    let result = exp.run()?;
    write_atomic(&a.out, &rounds_csv(&result)?)?;
    let summary = summary_text(&spec, &result)?;
    write_atomic(&summary_path(&a.out), summary.as_bytes())?;
    let _ = write!(stdout, "{summary}");
    Ok(match &result.certificate {
        Some(c) if !c.satisfied => EXIT_FAILURE,
        _ => EXIT_OK,
    })
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

fn cmd_verify(a: VerifyArgs, stdout: &mut dyn Write) -> Result<i32> {
    let mut suites = Vec::new();
    for s in &a.suites {
        if s == "all" {
            suites.extend(Suite::ALL);
        } else {
            suites.push(Suite::from_id(s).ok_or_else(|| {
                Error::Config(format!(
                    "unknown suite {s:?}; expected lemmas, argmin, bounds, matrix or all"
                ))
            })?);
        }
    }
    suites.dedup();
    let opts = VerifyOptions {
        suites: suites.clone(),
        trials: a.trials,
        tolerance: a.tolerance,
        seed: a.seed,
        inject_fault: a.inject_fault,
    };
    if opts.trials == 0 {
        return Err(Error::Config("--trials must be at least 1".into()));
    }
    let report = match thread_cap()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| verify(&opts))?,
        None => verify(&opts)?,
    };
    for line in report.suite_lines(&suites) {
        let _ = writeln!(stdout, "{line}");
    }
    if report.passed() {
        return Ok(EXIT_OK);
    }
    let _ = writeln!(stdout, "failure manifest:");
    for line in report.manifest() {
        let _ = writeln!(stdout, "  {line}");
    }
    Ok(EXIT_FAILURE)
}

fn cmd_curves(a: CurvesArgs, stdout: &mut dyn Write) -> Result<i32> {
    let bytes = tidy_curves(&a.inputs)?;
    write_atomic(&a.out, &bytes)?;
    let _ = writeln!(
        stdout,
        "wrote {} ({} runs)",
        a.out.display(),
        a.inputs.len()
    );
    Ok(EXIT_OK)
}

fn cmd_list(stdout: &mut dyn Write) -> Result<i32> {
    let _ = writeln!(stdout, "algorithms:");
    for id in Preset::IDS {
        let matched = super::experiment::matched_problem(id)
            .map(|k| k.id())
            .unwrap_or("");
        let _ = writeln!(stdout, "  {id:<14} (default problem: {matched})");
    }
    let _ = writeln!(stdout, "problems:");
    for id in ProblemKind::IDS {
        let _ = writeln!(stdout, "  {id}");
    }
    Ok(EXIT_OK)
}
