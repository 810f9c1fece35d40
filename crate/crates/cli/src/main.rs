use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;

use config::Settings;

/// Experiments on square-free values of integer polynomials.
#[derive(Parser, Debug)]
#[command(name = "sqfree", version)]
struct Cli {
    /// Seed for randomized factoring and root finding.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; defaults to $SQFREE_WORKERS, then the CPU count.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// `key = value` settings file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}`")),
        }
    }
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// List primes in [lo, hi].
    Primes {
        #[arg(long)]
        lo: Option<u64>,
        #[arg(long)]
        hi: Option<u64>,
    },
    /// Factor a positive integer.
    Factor {
        #[arg(long)]
        n: Option<String>,
    },
    /// Roots of f modulo p^k.
    Roots(PolyPrime),
    /// R_f(p^k) from root sets.
    Rinv {
        #[command(flatten)]
        target: PolyPrime,
        /// Allow negative arguments.
        #[arg(long)]
        signed: bool,
    },
    /// R_f(n) by direct scan up to a cap.
    Rbrute {
        #[arg(long)]
        poly: Option<String>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// R_f(p), R_f(p²) for all primes up to a limit.
    Survey {
        #[arg(long)]
        poly: Option<String>,
        #[arg(long)]
        limit: Option<u64>,
        #[arg(long)]
        chunk: Option<u64>,
        /// Resumable progress log.
        #[arg(long)]
        journal: Option<PathBuf>,
    },
    /// δ(p²) for Φ_ℓ next to the tabulated A_p.
    Delta {
        #[arg(long)]
        ell: Option<u64>,
        #[arg(long)]
        limit: Option<u64>,
    },
    /// Euler-product bracket against the census proportion.
    Density {
        #[arg(long)]
        poly: Option<String>,
        #[arg(long)]
        x: Option<u64>,
        #[arg(long)]
        trunc: Option<u64>,
        #[arg(long)]
        bound: Option<u64>,
        #[arg(long)]
        slack: Option<f64>,
        /// Also write per-argument verdicts as CSV.
        #[arg(long)]
        verdicts: Option<PathBuf>,
    },
    /// Square-free verdict for each f(d), 1 <= d <= X.
    Census {
        #[arg(long)]
        poly: Option<String>,
        #[arg(long)]
        x: Option<u64>,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Primes p with R_g(p²) <= p for g = Y² + bY + ac.
    Quadratic {
        #[arg(long, allow_hyphen_values = true)]
        a: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<i64>,
        #[arg(long)]
        limit: Option<u64>,
    },
    /// Number of b mod m with b^{2n} ≡ 1.
    Rho {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        m: Option<u64>,
    },
    /// Statistics of 1 - a^n over A <= |a| <= 2A.
    Abc {
        #[arg(long)]
        n: Option<u64>,
        /// One or more comma-separated values of A.
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        c1: Option<f64>,
        #[arg(long)]
        c2: Option<f64>,
        /// Also write the d,R histogram of the last run.
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Run a named preset.
    Repro {
        #[arg(value_enum)]
        name: commands::Preset,
    },
}

#[derive(Args, Debug, Clone)]
pub struct PolyPrime {
    /// Coefficients from the constant term up, or `cyclotomic:ℓ`.
    #[arg(long)]
    poly: Option<String>,
    #[arg(long)]
    prime: Option<u64>,
    #[arg(long)]
    power: Option<u32>,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Core(sqfree_core::Error),
}

impl From<sqfree_core::Error> for CliError {
    fn from(e: sqfree_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(sqfree_core::Error::SolubilityFailure(_)) => 2,
            _ => 1,
        }
    }
}

/// What a command produces: the main artifact and a one-line summary.
pub struct Output {
    pub body: String,
    pub summary: String,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut settings = Settings::load(cli.config.as_deref())?;
    let workers = match settings.silent("workers", cli.workers)? {
        Some(w) => w,
        None => match std::env::var("SQFREE_WORKERS") {
            Ok(v) => v.parse().map_err(|_| CliError::Validation(format!("SQFREE_WORKERS: bad value `{v}`")))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if workers == 0 {
        return Err(CliError::Validation("workers must be positive".into()));
    }
    let seed = settings.get("seed", cli.seed, sqfree_core::DEFAULT_SEED)?;
    let format = settings.opt("format", cli.format)?;
    let out = settings.silent::<PathBuf>("out", cli.out)?;
    let ctx = commands::Context { seed, format };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    let output = pool.install(|| commands::dispatch(cli.command, &ctx, &mut settings))?;

    match out {
        Some(path) => std::fs::write(&path, output.body)?,
        None => std::io::stdout().write_all(output.body.as_bytes())?,
    }
    eprintln!("{}", output.summary);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
