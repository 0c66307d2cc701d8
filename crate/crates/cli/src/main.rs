//! `clex`: command-line front end for the cluster-expansion toolkit.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use output::{Artifact, Cache, Format};

/// Cache directory for finished enumeration artifacts when `--cache-dir`
/// is not given.
pub const CACHE_ENV: &str = "CLUSTEX_CACHE";

#[derive(Debug, Parser, Serialize)]
#[command(name = "clex", version, about = "Cluster expansions, checked against brute force")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value = "table", global = true)]
    pub format: Format,
    /// Write the artifact here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Memo directory for finished artifacts.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Graph and tree enumeration, partition schemes.
    #[command(subcommand)]
    Graphs(commands::GraphsCmd),
    /// Ursell coefficients of interaction matrices.
    #[command(subcommand)]
    Ursell(commands::UrsellCmd),
    /// Pair potentials: stability, regularity, instability witnesses.
    #[command(subcommand)]
    Potentials(commands::PotentialsCmd),
    /// Lattice Mayer coefficients, radius bounds, virial tools.
    #[command(subcommand)]
    Mayer(commands::MayerCmd),
    /// Abstract polymer gases and convergence criteria.
    #[command(subcommand)]
    Polymer(commands::PolymerCmd),
    /// Two-dimensional Ising model.
    #[command(subcommand)]
    Ising(commands::IsingCmd),
    /// Hard-sphere overlap integrals and the disc radius bound.
    #[command(subcommand)]
    Hardsphere(commands::HardsphereCmd),
    /// Run a self-check suite; exits 1 if any check fails.
    Verify(commands::VerifyArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("clex: cannot size thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let config = serde_json::to_value(&cli.command).expect("serialisable");
    let name = commands::name(&cli.command);
    let cache = cli
        .global
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
        .map(Cache::new);

    let cached = cache.as_ref().and_then(|c| c.load(&name, &config).filter(|a| a.seed == cli.global.seed));
    let artifact = match cached {
        Some(a) => a,
        None => match commands::run(&cli.command, cli.global.seed) {
            Ok(mut a) => {
                a.command = name;
                a.seed = cli.global.seed;
                a.config = config;
                if let Some(c) = &cache {
                    if let Err(e) = c.store(&a) {
                        eprintln!("clex: cache write failed: {e}");
                    }
                }
                a
            }
            Err(e) => {
                eprintln!("clex: {e}");
                return ExitCode::from(e.exit_code());
            }
        },
    };
    finish(&artifact, &cli.global)
}

fn finish(a: &Artifact, g: &Global) -> ExitCode {
    if let Err(e) = output::emit(&output::render(a, g.format), g.output.as_deref()) {
        eprintln!("clex: cannot write output: {e}");
        return ExitCode::from(1);
    }
    if a.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
