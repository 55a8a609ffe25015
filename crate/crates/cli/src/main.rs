use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod error;
mod figures;
mod svg;
mod table;

use config::Grid;
use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "effham", version, about = "Effective Hamiltonians by Givens rotations and recursive Schrieffer-Wolff")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Parameter file (TOML or JSON), laid over the subcommand's defaults
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Convergence tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Target order of the recursive Schrieffer-Wolff transformation
    #[arg(long)]
    pub order: Option<usize>,
    /// Levels kept per subsystem
    #[arg(long)]
    pub levels: Option<usize>,
    /// Sweep override, repeatable
    #[arg(long = "grid", value_name = "NAME=START:STOP:STEPS")]
    pub grids: Vec<Grid>,
    /// Methods to run or columns to keep, comma separated
    #[arg(long, value_delimiter = ',')]
    pub method: Vec<String>,
    /// Assert the expected behavior, exit 4 if it fails
    #[arg(long)]
    pub check: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Pipeline {
    TwoRotation,
    ThreeRotation,
    Zeta4,
    Zeta6,
    Disp,
    Npad8,
    OmegaZx,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum EmitFormat {
    Infix,
    GraphJson,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Diagonalize a Hermitian matrix given as {"dim", "entries": [[re, im], ...]}
    Diag {
        matrix: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Commutator counts of plain and recursive Schrieffer-Wolff
    Counts {
        #[arg(long, default_value_t = 8)]
        kmax: usize,
        #[arg(long)]
        check_table1: bool,
    },
    /// ZZ estimates across the CZ avoided crossing
    Fig3 {
        #[command(flatten)]
        common: Common,
    },
    /// ZZ landscape of the resonator-coupled pair and the dip cut
    Fig4 {
        #[command(flatten)]
        common: Common,
    },
    /// Cross-resonance ZX strength against drive amplitude
    Fig5 {
        #[command(flatten)]
        common: Common,
    },
    /// Shift of the ZZ zero with the resonator coupling
    Fig7 {
        #[command(flatten)]
        common: Common,
    },
    /// Print a symbolic result and its node count
    EmitExpr {
        #[arg(value_enum)]
        pipeline: Pipeline,
        #[arg(long, value_enum, default_value_t = EmitFormat::Infix)]
        format: EmitFormat,
        #[command(flatten)]
        common: Common,
    },
}

fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("EFFHAM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Input(format!("EFFHAM_THREADS = `{raw}` is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(CliError::compute)
}

fn prepare(c: &Common) -> CliResult<()> {
    std::fs::create_dir_all(&c.out).map_err(|e| CliError::Input(format!("{}: {e}", c.out.display())))
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    match cli.command {
        Command::Diag { matrix, common } => {
            prepare(&common)?;
            commands::diag(&matrix, &common)?;
        }
        Command::Counts { kmax, check_table1 } => commands::counts(kmax, check_table1)?,
        Command::Fig3 { common } => {
            prepare(&common)?;
            figures::fig3(&common)?;
        }
        Command::Fig4 { common } => {
            prepare(&common)?;
            figures::fig4(&common)?;
        }
        Command::Fig5 { common } => {
            prepare(&common)?;
            figures::fig5(&common)?;
        }
        Command::Fig7 { common } => {
            prepare(&common)?;
            figures::fig7(&common)?;
        }
        Command::EmitExpr { pipeline, format, common } => {
            let out = commands::emit_expr(pipeline, format, &common)?;
            let mut stdout = std::io::stdout().lock();
            let printed = writeln!(stdout, "{}", out.text).and_then(|()| {
                writeln!(stdout, "node_count: {}", out.node_count)?;
                writeln!(stdout, "value: {}", table::fmt_num(out.value))?;
                writeln!(stdout, "numeric: {}", table::fmt_num(out.numeric))
            });
            // A closed pipe (`| head`) is not an error.
            if let Err(e) = printed {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("effham: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
