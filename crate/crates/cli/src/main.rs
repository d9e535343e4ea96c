use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gamma_damage::commands;

#[derive(Parser)]
#[command(
    name = "gamma-damage",
    version,
    about = "Damage-model recovery sequences, oracles and sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// JSON configuration file.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate g, h, W̄ and φ.
    Density {
        #[command(subcommand)]
        action: DensityAction,
    },
    /// Generate or validate meshes.
    Mesh {
        #[command(subcommand)]
        action: MeshAction,
    },
    /// Alternating minimization on a mesh.
    Solve(Io),
    /// Recovery constructions along an ε list.
    Recover(Io),
    /// 1D exhaustive oracle against the relaxed density.
    Oned(Io),
    /// ε-sweep against the predicted limit.
    Sweep(Io),
    /// SVG chart of a sweep CSV.
    Plot(Io),
}

#[derive(Subcommand)]
enum DensityAction {
    Eval(Io),
}

#[derive(Subcommand)]
enum MeshAction {
    Gen(Io),
    Validate(Io),
}

fn threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("GAMMA_DAMAGE_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| {
        anyhow::anyhow!("GAMMA_DAMAGE_THREADS must be a positive integer, got {v:?}")
    })?;
    if n == 0 {
        anyhow::bail!("GAMMA_DAMAGE_THREADS must be a positive integer, got 0");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

type Handler = fn(&Path, &Path) -> anyhow::Result<bool>;

fn run(cli: Cli) -> anyhow::Result<bool> {
    threads()?;
    let (f, io): (Handler, Io) = match cli.command {
        Command::Density {
            action: DensityAction::Eval(io),
        } => (commands::density_eval, io),
        Command::Mesh {
            action: MeshAction::Gen(io),
        } => (commands::mesh_gen, io),
        Command::Mesh {
            action: MeshAction::Validate(io),
        } => (commands::mesh_validate, io),
        Command::Solve(io) => (commands::solve, io),
        Command::Recover(io) => (commands::recover, io),
        Command::Oned(io) => (commands::oned, io),
        Command::Sweep(io) => (commands::sweep, io),
        Command::Plot(io) => (commands::plot, io),
    };
    f(&io.config, &io.out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
