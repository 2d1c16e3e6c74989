//! `tvls <subcommand> --config FILE [--key value ...]`.
//!
//! Exit codes: 0 success, 1 I/O or replay mismatch, 2 configuration error,
//! 3 solver divergence.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::{schema_text, Experiment, ExperimentConfig};
use super::manifest::{RunManifest, MANIFEST_NAME};
use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tvls", version, about = "TV-regularized inverse problems on 2-D grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Deblurring of a disk along an alpha schedule.
    Deblur(RunArgs),
    /// Denoising of a C on four domains.
    DenoiseBoundary(RunArgs),
    /// Circular-Radon inversion with the parameter rule and the dual probe.
    Radon(RunArgs),
    /// Disk denoising along a geometric alpha ladder with level-set diagnostics.
    ConvergenceSweep(RunArgs),
    /// Re-runs a manifest and checks that every output is bit-identical.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        /// Directory for the replayed outputs (default: <original>/replay).
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Prints the configuration schema.
    Schema,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Also write gnuplot-ready CSVs under plots/.
    #[arg(long)]
    emit_plots: bool,
    /// Key overrides as `--key value` or `--key=value`.
    #[arg(allow_hyphen_values = true, trailing_var_arg = true, value_name = "--KEY VALUE")]
    overrides: Vec<String>,
}

/// Pairs `--key value` / `--key=value` tokens. A bare `--emit-plots` among
/// them is the flag.
pub fn parse_overrides(tokens: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = tokens.iter().peekable();
    while let Some(tok) = it.next() {
        let key = tok
            .strip_prefix("--")
            .ok_or_else(|| Error::Config(format!("expected `--key`, got `{tok}`")))?;
        if let Some((k, v)) = key.split_once('=') {
            out.push((k.to_string(), v.to_string()));
        } else if key.replace('-', "_") == "emit_plots" && it.peek().is_none_or(|n| n.starts_with("--")) {
            out.push(("emit_plots".to_string(), "true".to_string()));
        } else {
            let v = it
                .next()
                .ok_or_else(|| Error::Config(format!("`--{key}` needs a value")))?;
            out.push((key.to_string(), v.clone()));
        }
    }
    Ok(out)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Divergence { .. } => EXIT_DIVERGENCE,
        Error::Io(_) => EXIT_IO,
        Error::NonFinite { .. } => EXIT_DIVERGENCE,
        Error::Config(_)
        | Error::Parse(_)
        | Error::InvalidParameter(_)
        | Error::InvalidDomain(_)
        | Error::GridMismatch { .. } => EXIT_CONFIG,
    }
}

fn load(experiment: Experiment, args: &RunArgs) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(&args.config)?;
    let mut overrides = parse_overrides(&args.overrides)?;
    if args.emit_plots {
        overrides.push(("emit_plots".into(), "true".into()));
    }
    ExperimentConfig::load(experiment, &text, &overrides)
}

fn report(m: &RunManifest, dir: &Path) {
    println!(
        "{}: {} files in {}, manifest {}",
        m.experiment,
        m.files.len(),
        dir.display(),
        dir.join(MANIFEST_NAME).display()
    );
}

fn run_experiment(experiment: Experiment, args: &RunArgs) -> Result<i32> {
    let cfg = load(experiment, args)?;
    let m = super::run(&cfg)?;
    report(&m, &cfg.output_dir()?);
    Ok(EXIT_OK)
}

fn replay(manifest: &Path, output_dir: Option<&Path>) -> Result<i32> {
    let original = RunManifest::parse(&fs::read_to_string(manifest)?)?;
    if !original.is_ok() {
        return Err(Error::Config(format!("cannot replay a run with status `{}`", original.status)));
    }
    let dir = match output_dir {
        Some(d) => d.to_path_buf(),
        None => manifest.parent().unwrap_or(Path::new(".")).join("replay"),
    };
    let cfg = original.replay_config(Some(&dir))?;
    let again = super::run(&cfg)?;
    report(&again, &dir);
    let bad = original.file_mismatches(&again);
    if bad.is_empty() {
        println!("replay: all {} files bit-identical", again.files.len());
        Ok(EXIT_OK)
    } else {
        for b in &bad {
            eprintln!("replay mismatch: {b}");
        }
        Ok(EXIT_IO)
    }
}

/// Parses `args` (program name first), runs and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Deblur(a) => run_experiment(Experiment::Deblur, a),
        Command::DenoiseBoundary(a) => run_experiment(Experiment::DenoiseBoundary, a),
        Command::Radon(a) => run_experiment(Experiment::Radon, a),
        Command::ConvergenceSweep(a) => run_experiment(Experiment::ConvergenceSweep, a),
        Command::Replay { manifest, output_dir } => replay(manifest, output_dir.as_deref()),
        Command::Schema => {
            print!("{}", schema_text());
            Ok(EXIT_OK)
        }
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("tvls: {e}");
            exit_code(&e)
        }
    }
}
