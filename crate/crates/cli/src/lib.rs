//! `pcmlax`: configuration loading, verification suites and report
//! writing for the dual-field principal chiral model toolkit.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;

use crate::commands::{execute, Command, RunSettings};
use crate::config::Loaded;
use crate::error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "pcmlax", version, about = "Dual-field principal chiral model verification suites")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `options.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `options.resolution_factor`.
    #[arg(long)]
    pub resolution_factor: Option<usize>,
    /// Emit every Lagrangian term as its own density file.
    #[arg(long)]
    pub terms: bool,
    #[arg(short, long)]
    pub verbose: bool,
}

/// Runs the CLI and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let started = Instant::now();
    let cfg = match Loaded::from_file(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("pcmlax: {e}");
            return e.exit_code();
        }
    };
    let opts = cfg.options();
    let resolution_factor = cli.resolution_factor.unwrap_or(opts.resolution_factor);
    if resolution_factor < 2 {
        eprintln!("pcmlax: --resolution-factor must be at least 2");
        return exit::CONFIG;
    }
    let settings = RunSettings {
        seed: cli.seed.unwrap_or(opts.seed),
        resolution_factor,
        terms: cli.terms,
    };
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.config.output_dir.as_ref().map(|d| cfg.base_dir.join(d)))
        .unwrap_or_else(|| PathBuf::from("pcmlax-out"));

    let (report, artifacts) = execute(cli.command, &cfg, settings);

    let written = std::fs::create_dir_all(&out)
        .map_err(|source| CliError::File {
            path: out.display().to_string(),
            source,
        })
        .and_then(|_| report::write_artifacts(&out, &artifacts))
        .and_then(|_| report.write(&out));
    let path = match written {
        Ok(p) => p,
        Err(e) => {
            eprintln!("pcmlax: {e}");
            return exit::CONFIG;
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let _ = report.print_summary(&mut lock, cli.verbose);
    let _ = std::io::Write::flush(&mut lock);
    println!("report: {}", path.display());
    // Timing goes to the terminal only; the report stays deterministic.
    println!("wall time: {:.3} s", started.elapsed().as_secs_f64());
    if let Some(e) = &report.error {
        eprintln!("pcmlax: {e}");
    }
    report.exit_code
}
