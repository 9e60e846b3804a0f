//! `wco` — weighted composition operators on weighted Bergman spaces of
//! the polydisk, from the command line: symmetry classification, defect
//! scans, matrix sections, norm tables, and disk self-map checks.
//!
//! Exit codes: 0 success (for `classify`: certified-yes), 2 certified-no,
//! 3 indeterminate, 1 usage or I/O error. All commands are deterministic
//! given the same configuration and seed.

mod commands;
mod schema;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{ResolvedConfig, SymClass};

#[derive(Parser)]
#[command(
    name = "wco",
    version,
    about = "Weighted composition operators on Bergman spaces of the polydisk",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Truncation caps per variable (comma separated; a single value is
    /// broadcast to all variables).
    #[arg(long, global = true, value_delimiter = ',')]
    trunc: Option<Vec<usize>>,

    /// Number of sample pairs for pointwise defect functionals.
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Sampling radius ρ of the closed polydisk draws, in (0, 0.9].
    #[arg(long, global = true)]
    radius: Option<f64>,

    /// RNG seed for sample draws.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Defect level below which a fully conditioned symbol is certified.
    #[arg(long, global = true)]
    tol_exact: Option<f64>,

    /// Defect level above which a condition-violating symbol is rejected.
    #[arg(long, global = true)]
    tol_reject: Option<f64>,

    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format; commands with a fixed format ignore this.
    #[arg(long, global = true, value_parser = ["json", "csv"])]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide membership in a symmetry class and emit a JSON report.
    Classify {
        /// Symbol file (JSON).
        symbol: PathBuf,
        /// Symmetry class to test.
        #[arg(long, value_enum)]
        class: SymClass,
        /// Conjugation file (JSON); required for --class csym.
        #[arg(long)]
        conjugation: Option<PathBuf>,
    },
    /// Evaluate all pointwise defect functionals plus the adjoint check.
    Defect {
        /// Symbol file (JSON).
        symbol: PathBuf,
        /// Conjugation file (JSON); enables the csym defect entry.
        #[arg(long)]
        conjugation: Option<PathBuf>,
    },
    /// Dump the matrix section as row,col,re,im CSV.
    Matrix {
        /// Symbol file (JSON).
        symbol: PathBuf,
    },
    /// Closed-form monomial norms against quadrature as CSV.
    Norms {
        /// Weight exponents ℓ per variable (comma separated).
        #[arg(long, value_delimiter = ',', required = true)]
        ell: Vec<usize>,
        /// Radial Gauss–Legendre node count.
        #[arg(long, default_value_t = 32)]
        radial: usize,
        /// Angular equispaced node count.
        #[arg(long, default_value_t = 64)]
        angular: usize,
    },
    /// Disk self-map criterion margins for a JSON list of LFTs, as CSV.
    Selfmap {
        /// JSON file with a list of {a,b,c,d} coefficient quadruples.
        maps: PathBuf,
    },
}

fn resolve(cli: &Cli) -> ResolvedConfig {
    let (command, symbol_path, conjugation_path) = match &cli.command {
        Command::Classify { symbol, conjugation, .. } => (
            "classify",
            Some(symbol.display().to_string()),
            conjugation.as_ref().map(|p| p.display().to_string()),
        ),
        Command::Defect { symbol, conjugation } => (
            "defect",
            Some(symbol.display().to_string()),
            conjugation.as_ref().map(|p| p.display().to_string()),
        ),
        Command::Matrix { symbol } => ("matrix", Some(symbol.display().to_string()), None),
        Command::Norms { .. } => ("norms", None, None),
        Command::Selfmap { maps } => ("selfmap", Some(maps.display().to_string()), None),
    };
    ResolvedConfig {
        command: command.to_string(),
        symbol_path,
        conjugation_path,
        trunc: cli.trunc.clone().unwrap_or_else(|| vec![8]),
        samples: cli.samples.unwrap_or(100),
        radius: cli.radius.unwrap_or(0.8),
        seed: cli.seed.unwrap_or(42),
        tol_exact: cli.tol_exact.unwrap_or(wco_core::classify::TOL_EXACT),
        tol_reject: cli.tol_reject.unwrap_or(wco_core::classify::TOL_REJECT),
        format: cli.format.clone().unwrap_or_else(|| "json".to_string()),
    }
}

fn run(cli: &Cli) -> anyhow::Result<i32> {
    let config = resolve(cli);
    config.validate()?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Classify { symbol, class, conjugation } => {
            commands::cmd_classify(&config, *class, symbol, conjugation.as_deref(), out)
        }
        Command::Defect { symbol, conjugation } => {
            commands::cmd_defect(&config, symbol, conjugation.as_deref(), out)
        }
        Command::Matrix { symbol } => commands::cmd_matrix(&config, symbol, out),
        Command::Norms { ell, radial, angular } => {
            commands::cmd_norms(&config, ell, *radial, *angular, out)
        }
        Command::Selfmap { maps } => commands::cmd_selfmap(maps, out),
    }
}

fn main() {
    // Optional cap on worker threads; engine parallelism inherits it.
    if let Ok(raw) = std::env::var("WCO_LAB_THREADS") {
        if let Ok(n) = raw.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
