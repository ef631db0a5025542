//! `wgmodes` command-line tool.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    NotGuaranteed(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error(transparent)]
    Lib(#[from] wgmodes::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::NotGuaranteed(_) | Self::CheckFailed(_) => 2,
            Self::Lib(wgmodes::Error::Modes(wgmodes::ModesError::NotGuaranteed { .. })) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "wgmodes",
    version,
    about = "Cut-off modes of waveguides filled with anisotropic media"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (stdout when omitted, where applicable).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Medium validation.
    Medium {
        #[command(subcommand)]
        action: MediumAction,
    },
    /// Mesh generation, refinement and inspection.
    Mesh {
        #[command(subcommand)]
        action: MeshAction,
    },
    /// Cut-off wavenumbers on every refinement level, as CSV.
    Solve(Common),
    /// Scalar versus vector spectrum comparison, as JSON.
    Crossval(Common),
    /// Modal fields as legacy VTK files.
    Fields(Common),
}

#[derive(Debug, Subcommand)]
enum MediumAction {
    /// Prints the condition report; exit 2 when TE/TM independence is not guaranteed.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum MeshAction {
    /// Writes the configured mesh and its refinements.
    Gen(Common),
    /// Refines a mesh file uniformly.
    Refine {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Prints mesh statistics as JSON.
    Info {
        #[arg(long)]
        mesh: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Medium {
            action: MediumAction::Check { config },
        } => commands::medium_check(&config),
        Command::Mesh { action } => match action {
            MeshAction::Gen(c) => commands::mesh_gen(&c.config, c.out.as_deref()),
            MeshAction::Refine { mesh, levels, output } => commands::mesh_refine(&mesh, levels, &output),
            MeshAction::Info { mesh } => commands::mesh_info(&mesh),
        },
        Command::Solve(c) => commands::solve(&c.config, c.out.as_deref()),
        Command::Crossval(c) => commands::crossval(&c.config, c.out.as_deref()),
        Command::Fields(c) => commands::fields(&c.config, c.out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wgmodes: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
