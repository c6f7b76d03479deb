mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{ExitError, Outcome};

#[derive(Parser, Debug)]
#[command(
    name = "qcert",
    version,
    about = "Distinct partition tables, certified bounds and inequality verification"
)]
pub struct Cli {
    #[command(flatten)]
    pub cfg: RunConfig,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Largest n kept in the q table.
    #[arg(long, global = true, default_value_t = 20_000)]
    pub n_max: usize,
    /// Working precision in bits.
    #[arg(long, global = true, default_value_t = 192)]
    pub precision: u32,
    /// Output format (defaults depend on the command).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Directory for the q-table cache (overrides QCERT_CACHE_DIR).
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Maximal bisection depth for positivity certificates.
    #[arg(long, global = true, default_value_t = 60)]
    pub max_depth: u32,
    /// Omit wall-clock fields so that reports are reproducible byte for byte.
    #[arg(long, global = true)]
    pub no_timing: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print exact values q(n).
    Qtable {
        #[arg(long, conflicts_with = "range")]
        n: Option<usize>,
        /// Inclusive range `a..b`.
        #[arg(long)]
        range: Option<String>,
    },
    /// Certified lower and upper bounds for q(n + s) next to the exact value.
    Bounds {
        #[arg(long, conflicts_with = "range")]
        n: Option<u64>,
        /// Inclusive range `a..b`.
        #[arg(long)]
        range: Option<String>,
        #[arg(long, default_value_t = 1)]
        step: u64,
        #[arg(short, long, default_value_t = 0)]
        s: u32,
        /// Truncation order N.
        #[arg(long = "order", short = 'N', default_value_t = 14)]
        order: u32,
    },
    /// Exact expansion coefficients.
    Coeffs {
        /// One of B, Bbar, Chat, Bhat.
        #[arg(long, default_value = "Bhat")]
        family: String,
        /// Index or inclusive range `a..b`.
        #[arg(long, default_value = "0..6")]
        index: String,
        #[arg(short, long, default_value_t = 0)]
        s: u32,
    },
    /// Verify one theorem end to end.
    Verify {
        theorem: String,
        /// Skip the scan below the threshold.
        #[arg(long)]
        no_sharpness: bool,
    },
    /// Certify one bound inequality and report its crossover.
    Certify {
        ineq: String,
        /// Truncation order N (defaults to the order used for the inequality).
        #[arg(long = "order", short = 'N')]
        order: Option<u32>,
    },
    /// Verify all eight theorems.
    ReproduceAll {
        /// Also compare the built-in constants with the published ones.
        #[arg(long)]
        paper_check: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Ok(Outcome::Inconclusive) => ExitCode::from(2),
        Err(e) => {
            let code = e.downcast_ref::<ExitError>().map_or(commands::EXIT_RUNTIME, |x| x.code);
            eprintln!("qcert: {e:#}");
            ExitCode::from(code)
        }
    }
}
