//! `chdef`: construction, verification, sweeps, bending and audits.

mod commands;
mod error;
mod rep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chdef::chgeom::Tolerances;
use commands::{AuditConfig, LevelChoice, SweepConfig};
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "chdef",
    version,
    about = "Deformations of cusped lattices into SU(n,1)"
)]
struct Cli {
    /// Seed for randomized checks, recorded in every output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for sweeps and audits (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// The figure-eight knot group family.
    #[command(subcommand)]
    Figure8(Figure8Command),
    /// Bend a representation along a decomposition.
    Bend {
        #[arg(long)]
        datum: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Finite horoball consistency audit.
    Audit(AuditArgs),
    /// Classify the image of a word.
    Classify {
        /// Representation file, or `figure8`.
        #[arg(long)]
        rep: String,
        #[arg(long)]
        word: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
    },
}

#[derive(Subcommand)]
enum Figure8Command {
    /// Exact identities of the family.
    Verify {
        /// Also write the report here.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Per-angle invariants as CSV.
    Sweep {
        #[arg(long, allow_hyphen_values = true)]
        start: f64,
        #[arg(long, allow_hyphen_values = true)]
        end: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
        /// Append the consistency margin at each angle.
        #[arg(long)]
        audit: bool,
        #[arg(long, default_value_t = 6)]
        ball_length: usize,
        /// Horoball level for the margin column; calibrated at alpha = 0 if omitted.
        #[arg(long, allow_hyphen_values = true)]
        level: Option<f64>,
    },
    /// Cusp structure at one angle.
    Peripheral {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
    },
}

#[derive(Args)]
struct AuditArgs {
    /// Representation file, or `figure8`.
    #[arg(long)]
    rep: String,
    /// Comma-separated cusp words.
    #[arg(long)]
    cusp: String,
    #[arg(long, default_value_t = 6)]
    ball_length: usize,
    #[arg(
        long,
        allow_hyphen_values = true,
        conflicts_with = "calibrate",
        required_unless_present = "calibrate"
    )]
    level: Option<f64>,
    #[arg(long)]
    calibrate: bool,
    #[arg(long, default_value_t = 0.5)]
    backoff: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha: f64,
    /// Also check that cusp elements at this angle keep their type.
    #[arg(long, allow_hyphen_values = true)]
    reference_alpha: Option<f64>,
    #[arg(long, default_value_t = 0)]
    shadow_samples: usize,
    #[arg(long)]
    out: PathBuf,
}

fn run(cli: Cli) -> CliResult<bool> {
    let tol = Tolerances::from_env().map_err(|e| CliError::Usage(e.to_string()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let seed = cli.seed;
    pool.install(|| match cli.command {
        Command::Figure8(Figure8Command::Verify { json, inject_fault }) => {
            commands::figure8_verify(json.as_deref(), inject_fault, seed)
        }
        Command::Figure8(Figure8Command::Sweep {
            start,
            end,
            steps,
            out,
            audit,
            ball_length,
            level,
        }) => {
            let cfg = SweepConfig {
                start,
                end,
                steps,
                audit,
                ball_length,
                level,
                seed,
            };
            commands::figure8_sweep(&cfg, &out, &tol)
        }
        Command::Figure8(Figure8Command::Peripheral { alpha }) => {
            commands::figure8_peripheral(alpha, seed, &tol)
        }
        Command::Bend { datum, out } => commands::bend_cmd(&datum, &out, seed),
        Command::Audit(a) => {
            let level = match a.level {
                Some(s) => LevelChoice::Fixed(s),
                None => LevelChoice::Calibrate { backoff: a.backoff },
            };
            let cfg = AuditConfig {
                rep: a.rep,
                cusp: a.cusp,
                ball_length: a.ball_length,
                level,
                alpha: a.alpha,
                reference_alpha: a.reference_alpha,
                shadow_samples: a.shadow_samples,
                seed,
            };
            commands::audit_cmd(&cfg, &a.out, &tol)
        }
        Command::Classify { rep, word, alpha } => {
            commands::classify_cmd(&rep, &word, alpha, seed, &tol)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("chdef: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
