//! `stretchlab <cmd> --config <file.json> --out <dir>`

mod commands;
mod envelope;
mod solve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "stretchlab", version, about = "Genus-2 representations, earthquakes and p-Schatten harmonic maps")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args, Clone)]
struct Io {
    /// JSON configuration for the command.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build and validate a target representation.
    Rep(Io),
    /// Translation lengths of words under σ and ρ.
    Length(Io),
    /// Lower bound on the Lipschitz constant from short words.
    Kbound(Io),
    /// Length derivative against the measure-cocycle pairing.
    Duality(Io),
    /// Mass of standard measures against twice the length.
    Mass(Io),
    /// Symmetry of mixed length-twist derivatives.
    Wolpert(Io),
    /// p-continuation, currents and relation checks.
    Solve {
        #[command(flatten)]
        io: Io,
        /// Start each stage from its checkpoint in the output directory when present.
        #[arg(long)]
        resume: bool,
    },
    /// Trend table from a solve summary.
    Report(Io),
}

fn init_threads() {
    if let Some(n) = std::env::var("STRETCHLAB_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if n > 0 {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("thread pool: {e}");
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads();
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Rep(io) => commands::rep(&io.config, &io.out),
        Cmd::Length(io) => commands::length_cmd(&io.config, &io.out),
        Cmd::Kbound(io) => commands::kbound(&io.config, &io.out),
        Cmd::Duality(io) => commands::duality(&io.config, &io.out),
        Cmd::Mass(io) => commands::mass_cmd(&io.config, &io.out),
        Cmd::Wolpert(io) => commands::wolpert(&io.config, &io.out),
        Cmd::Solve { io, resume } => solve::solve(&io.config, &io.out, *resume),
        Cmd::Report(io) => commands::report(&io.config, &io.out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("stretchlab: {f}");
            ExitCode::from(f.code())
        }
    }
}
