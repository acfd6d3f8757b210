use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spinbox_cli::commands;
use spinbox_cli::config::{self, RunConfig};
use spinbox_cli::output::ImageFormats;
use spinbox_cli::{config_exit_code, exit, run_exit_code};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Pgm,
    Both,
}

#[derive(Debug, Parser)]
#[command(name = "spinbox", version, about = "Spin-2 box-mode instability simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// INI configuration file; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides [mc] seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Image output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Instability rate of each mode over the q scan.
    Spectrum,
    /// Single-mode density grids.
    Modes,
    /// Monte Carlo realizations with per-field analysis.
    Simulate,
    /// Re-analyze stored realization directories.
    Analyze {
        /// Directory holding realization directories.
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(run(cli) as u8)
}

fn run(cli: Cli) -> i32 {
    let mut cfg = match &cli.config {
        Some(p) => match config::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return config_exit_code(&e);
            }
        },
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let formats = match cli.format {
        Format::Csv => ImageFormats { csv: true, pgm: false },
        Format::Pgm => ImageFormats { csv: false, pgm: true },
        Format::Both => ImageFormats { csv: true, pgm: true },
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return exit::CONFIG;
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return exit::NUMERICAL;
        }
    };
    pool.install(|| {
        let result = match &cli.command {
            Command::Spectrum => commands::spectrum(&cfg, &cli.out),
            Command::Modes => commands::modes(&cfg, &cli.out, formats),
            Command::Simulate => commands::simulate(&cfg, &cli.out, formats),
            Command::Analyze { input } => match commands::analyze(&cfg, input, &cli.out) {
                Ok(p) => Ok(p),
                Err(failure) => {
                    for e in &failure.0 {
                        eprintln!("error: {e}");
                    }
                    return failure.0.first().map_or(exit::IO, run_exit_code);
                }
            },
        };
        match result {
            Ok(manifest) => {
                println!("manifest: {}", manifest.display());
                exit::OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                run_exit_code(&e)
            }
        }
    })
}
