use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cesaro_cli::config::{ExperimentConfig, Source};
use cesaro_cli::error::{CliError, ConfigError};
use cesaro_cli::{report, run, table, verify};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cesaro", version, about = "Cesaro-mean subsequence selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cap on oracle evaluations; overrides `oracle.max_evaluations`.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the configured gallery sequence to a CSV file.
    Gallery {
        #[arg(long)]
        config: PathBuf,
        /// Destination file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Dunford-Pettis diagnostics only.
    Diagnose(Common),
    /// Diagnostics and selection, without oracle columns.
    Select(Common),
    /// Oracle cross-checks; `--seed` adds a randomised duality sweep.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// The full experiment with all reports.
    Run(Common),
}

fn load(common: &Common) -> Result<(ExperimentConfig, Option<PathBuf>), CliError> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(b) = common.budget {
        if b == 0 {
            return Err(ConfigError::Field { field: "--budget", reason: "must be at least 1".into() }.into());
        }
        cfg.oracle.budget.max_evaluations = b as u128;
    }
    let out = common.out.clone().or_else(|| cfg.output.as_ref().map(|o| cfg.base_dir.join(o)));
    Ok((cfg, out))
}

fn require_out(out: Option<PathBuf>) -> Result<PathBuf, CliError> {
    out.ok_or_else(|| ConfigError::Field { field: "output", reason: "give --out or `output` in the config".into() }.into())
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.into(), source: e })
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gallery { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            if matches!(cfg.source, Source::File(_)) {
                return Err(ConfigError::Field { field: "sequence", reason: "`gallery` needs a gallery source".into() }.into());
            }
            let seq = run::build_sequence(&cfg)?;
            table::write_sequence(&out, &seq)?;
            println!("wrote {} ({} atoms, {} terms)", out.display(), seq.space().atom_count(), seq.len());
        }
        Command::Diagnose(common) => {
            let (cfg, out) = load(&common)?;
            let seq = run::build_sequence(&cfg)?;
            let rep = run::diagnose(&seq, &cfg.diagnostics)?;
            let text = report::render_diagnostics(&rep);
            match out {
                Some(dir) => {
                    ensure_dir(&dir)?;
                    report::write_file(&dir, "diagnostics.txt", &text)?;
                    println!("verdict: {}", rep.verdict);
                }
                None => print!("{text}"),
            }
        }
        Command::Select(common) => {
            let (mut cfg, out) = load(&common)?;
            cfg.oracle.enabled = false;
            let dir = require_out(out)?;
            let bundle = run::run_experiment(&cfg, &dir)?;
            print_summary(&bundle);
        }
        Command::Verify { common, seed } => {
            let (cfg, out) = load(&common)?;
            let checks = verify::verify(&cfg, seed)?;
            let text: String = checks.iter().map(|c| c.line() + "\n").collect();
            print!("{text}");
            if let Some(dir) = out {
                ensure_dir(&dir)?;
                report::write_file(&dir, "verify.txt", &text)?;
            }
            if checks.iter().any(|c| c.passed == Some(false)) {
                std::process::exit(1);
            }
        }
        Command::Run(common) => {
            let (cfg, out) = load(&common)?;
            let dir = require_out(out)?;
            let bundle = run::run_experiment(&cfg, &dir)?;
            print_summary(&bundle);
        }
    }
    Ok(())
}

fn print_summary(bundle: &run::RunBundle) {
    println!("verdict: {}", bundle.report.verdict);
    if let Some(o) = &bundle.outcome {
        println!("selected {} indices ({})", o.selection.selection.len(), o.selection.selection.rule.tag());
    }
    for f in &bundle.files {
        println!("wrote {}", f.display());
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
