//! `canonlab`: command-line front end for display logarithms, tropical
//! pictures and canonical-subgroup certificates.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use canonlab::Error;

#[derive(Parser, Debug)]
#[command(name = "canonlab", version, about = "Exact canonical-subgroup certificates from displays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Tsv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundArg {
    Standard,
    Katz,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Display file (JSON with p, e, g, h, L, M).
    pub file: PathBuf,
    /// Certification level N.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=12))]
    pub level: u32,
    /// Deepest logarithm level; defaults to N + 2.
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads for grid scans; defaults to the available parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hasse invariant H and the diagonal valuations U_i.
    Hasse(Common),
    /// Logarithm coefficient matrices a_n and their valuations.
    Log(Common),
    /// Check the logarithm hypotheses at level N.
    Hyp(Common),
    /// Newton polygons, H-cells and planar tropicalizations.
    Trop {
        #[command(flatten)]
        common: Common,
        /// Grid denominator Q; defaults to 2 p^2 (p - 1).
        #[arg(long)]
        grid_den: Option<u64>,
    },
    /// Full canonical-subgroup certificate at level N.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Grid denominator Q; defaults to 2 p^2 (p - 1).
        #[arg(long)]
        grid_den: Option<u64>,
        /// Also report the experimental Katz-style bound (never asserted).
        #[arg(long, value_enum, default_value_t = BoundArg::Standard)]
        bound: BoundArg,
    },
    /// Formal group law, [p] and its shape check to total degree D.
    Fgl {
        #[command(flatten)]
        common: Common,
        /// Series degree D; defaults to p^2 - 1.
        #[arg(long)]
        degree: Option<u32>,
    },
    /// Evaluate a Witt-vector expression, e.g. "add [1] [1]" or "frob (1, 2, 0)".
    Witt {
        /// `<op> <x> [<y>]` with op in add, sub, mul, neg, frob, ver, ghost, teich.
        expr: String,
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        e: u32,
        /// Witt length L.
        #[arg(long = "len", default_value_t = 2)]
        len: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Randomized sweep over triangular displays (hypotheses, H-cells, counts).
    Sweep {
        /// Number of displays.
        #[arg(long, default_value_t = 50)]
        count: usize,
        /// RNG seed.
        #[arg(long, env = "CANONLAB_SEED", default_value_t = 20240611)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

/// Exit codes: 1 for user input, 2 for a mathematical decline, 3 for an
/// internal consistency failure.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ExtensionRequired(_) => 2,
        Error::Internal(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Hasse(c) => commands::hasse(&c),
        Command::Log(c) => commands::log(&c),
        Command::Hyp(c) => commands::hyp(&c),
        Command::Trop { common, grid_den } => commands::trop(&common, grid_den),
        Command::Certify { common, grid_den, bound } => commands::certify(&common, grid_den, bound),
        Command::Fgl { common, degree } => commands::fgl(&common, degree),
        Command::Witt { expr, p, e, len, format } => commands::witt(&expr, p, e, len, format),
        Command::Sweep { count, seed, format } => commands::sweep(count, seed, format),
    };
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let nl = if out.body.ends_with('\n') { "" } else { "\n" };
            // a closed pipe (e.g. `| head`) is not an error of the computation
            let _ = write!(stdout, "{}{nl}", out.body).and_then(|_| stdout.flush());
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
