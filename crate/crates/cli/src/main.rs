//! `nilseq`: config-driven experiment runner.
//!
//! Exit codes: 0 success, 2 invalid config, 3 computation or I/O failure.
//! Errors are also printed to stderr as a single JSON object.

mod config;
mod expr;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use config::{ExperimentConfig, Kind};
use nilseq_core::torus::Precision;
use run::CliError;

#[derive(Parser)]
#[command(name = "nilseq", version, about = "Nilsequence, Möbius-disjointness and noncommutative-torus experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy classification of an integer matrix (`kind = "classify"`).
    Classify(Common),
    /// Sequence construction and dump (`kind = "torus-seq"` or `"nc-seq"`).
    Seq(Common),
    /// Nilsequence + zero-density decomposition (`kind = "decompose"`).
    Decompose(Common),
    /// Möbius correlation at checkpoints (`kind = "correlate"`).
    Correlate(Common),
    /// Weyl exponential-sum averages (`kind = "weyl"`).
    Weyl(Common),
    /// Runs any experiment kind and writes the full report.
    Report(Common),
    /// Commutative torus experiments.
    Torus {
        #[arg(value_enum)]
        action: TorusAction,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TorusAction {
    /// Orbit points `A^n x` (`kind = "torus-seq"`).
    Orbit,
    /// Character sequence `e(<v, A^n x>)` (`kind = "torus-seq"`).
    Charseq,
    /// Weyl test (`kind = "weyl"`).
    Weyl,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created on success.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the config's phase precision.
    #[arg(long, value_enum)]
    precision: Option<PrecisionArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Exact,
    Fast,
}

impl Command {
    fn parts(&self) -> (&Common, &'static [Kind]) {
        match self {
            Command::Classify(c) => (c, &[Kind::Classify]),
            Command::Seq(c) => (c, &[Kind::TorusSeq, Kind::NcSeq]),
            Command::Decompose(c) => (c, &[Kind::Decompose]),
            Command::Correlate(c) => (c, &[Kind::Correlate]),
            Command::Weyl(c) => (c, &[Kind::Weyl]),
            Command::Report(c) => (
                c,
                &[Kind::Classify, Kind::TorusSeq, Kind::NcSeq, Kind::Decompose, Kind::Correlate, Kind::Weyl],
            ),
            Command::Torus { action, common } => match action {
                TorusAction::Orbit | TorusAction::Charseq => (common, &[Kind::TorusSeq]),
                TorusAction::Weyl => (common, &[Kind::Weyl]),
            },
        }
    }
}

fn load(common: &Common, allowed: &[Kind]) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", common.config.display())))?;
    let mut cfg = ExperimentConfig::parse(&text).map_err(CliError::Validation)?;
    if !allowed.contains(&cfg.kind) {
        let names: Vec<&str> = allowed.iter().map(|k| k.name()).collect();
        return Err(CliError::Validation(format!(
            "config kind `{}` does not match this subcommand (expected {})",
            cfg.kind.name(),
            names.join(" or ")
        )));
    }
    if let Some(p) = common.precision {
        cfg.precision = match p {
            PrecisionArg::Exact => Precision::Exact,
            PrecisionArg::Fast => Precision::Fast,
        };
    }
    Ok(cfg)
}

fn write_all(dir: &Path, files: &[(&str, &[u8])]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    fs::create_dir_all(dir).map_err(io)?;
    for (name, bytes) in files {
        fs::write(dir.join(name), bytes).map_err(io)?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let (common, allowed) = cli.command.parts();
    let cfg = load(common, allowed)?;
    let threads = common.threads.unwrap_or(cfg.threads);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let model = run::validate(cfg)?;
    let mut out = run::run(&model);
    out.timings["threads"] = json!(rayon::current_num_threads());

    let report = run::report_bytes(&out);
    let timings = run::timings_bytes(&out);
    let mut files: Vec<(&str, &[u8])> = vec![("report.json", &report), ("timings.json", &timings)];
    files.extend(out.artifacts.iter().map(|a| (a.name.as_str(), a.bytes.as_slice())));
    write_all(&common.out, &files)?;
    match out.failure {
        Some(f) => Err(f),
        None => {
            println!("{}", common.out.join("report.json").display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
