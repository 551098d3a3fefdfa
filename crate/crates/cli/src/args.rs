use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use blockcg::experiments::{Scenario, DEFAULT_SEED, SCENARIO_IDS};

use crate::UsageError;

/// Environment variable that replaces the default seed when `--seed` is absent.
pub const SEED_ENV: &str = "BLOCKCG_SEED";

/// Block CG experiment runner with a-posteriori convergence bounds.
#[derive(Parser, Debug)]
#[command(name = "blockcg", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a registered example scenario.
    Example {
        /// Scenario id (ex4.1 .. ex4.6).
        id: String,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run on a diagonal matrix whose eigenvalues are read from a file.
    Spectrum {
        /// Plain text, one value per line, `#` starts a comment line.
        file: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run on the five-point Poisson matrix.
    Poisson {
        /// Mesh points per side; the matrix has order grid².
        #[arg(long, default_value_t = 20)]
        grid: usize,
        /// Apply symmetric IC(0) preconditioning explicitly.
        #[arg(long)]
        ic0: bool,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// List the registered scenarios.
    List,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunFlags {
    /// Block size (number of right-hand sides).
    #[arg(long = "s")]
    pub s: Option<usize>,
    /// Bound evaluation steps, comma separated.
    #[arg(long = "m", value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// Bound horizon beyond each step.
    #[arg(long = "jmax")]
    pub jmax: Option<usize>,
    /// Number of smallest eigenvalues to deflate.
    #[arg(long = "k1")]
    pub k1: Option<usize>,
    /// Number of largest eigenvalues to deflate.
    #[arg(long = "k2")]
    pub k2: Option<usize>,
    /// Relative residual tolerance in the A⁻¹-Frobenius norm.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Seed for the random initial guess (block sizes above one).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Maximum number of block steps.
    #[arg(long = "max-m")]
    pub max_m: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Output formats, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [Format::Csv, Format::Json])]
    pub format: Vec<Format>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
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

/// Where the coefficient matrix comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Example(String),
    SpectrumFile(PathBuf),
    Poisson { grid: usize, ic0: bool },
}

/// Fully resolved run request.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: Source,
    pub s: usize,
    pub tol: Option<f64>,
    pub max_m: Option<usize>,
    pub seed: u64,
    pub m: Option<Vec<usize>>,
    pub jmax: Option<usize>,
    pub k1: Option<usize>,
    pub k2: Option<usize>,
    pub out: PathBuf,
    pub csv: bool,
    pub json: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Request {
    List,
    Run(RunConfig),
}

/// Turns parsed arguments into a request. `env_seed` is the raw value of [`SEED_ENV`].
pub fn resolve(cli: Cli, env_seed: Option<&str>) -> Result<Request, UsageError> {
    let (source, flags) = match cli.command {
        Command::List => return Ok(Request::List),
        Command::Example { id, flags } => {
            if !SCENARIO_IDS.contains(&id.as_str()) {
                return Err(UsageError(format!(
                    "unknown scenario '{id}' (expected one of {})",
                    SCENARIO_IDS.join(", ")
                )));
            }
            (Source::Example(id), flags)
        }
        Command::Spectrum { file, flags } => (Source::SpectrumFile(file), flags),
        Command::Poisson { grid, ic0, flags } => {
            if grid < 2 {
                return Err(UsageError(format!("--grid must be at least 2, got {grid}")));
            }
            (Source::Poisson { grid, ic0 }, flags)
        }
    };

    let s = flags.s.unwrap_or(1);
    if s == 0 {
        return Err(UsageError("--s must be at least 1".into()));
    }
    if let Some(tol) = flags.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(UsageError(format!("--tol must be positive, got {tol}")));
        }
    }
    if flags.max_m == Some(0) {
        return Err(UsageError("--max-m must be at least 1".into()));
    }
    if let Some(m) = &flags.m {
        if m.contains(&0) {
            return Err(UsageError("--m values must be at least 1".into()));
        }
    }
    if flags.format.is_empty() {
        return Err(UsageError("--format needs at least one of csv, json".into()));
    }
    let seed = match (flags.seed, env_seed) {
        (Some(seed), _) => seed,
        (None, Some(raw)) => raw
            .trim()
            .parse()
            .map_err(|_| UsageError(format!("{SEED_ENV} must be an unsigned integer, got '{raw}'")))?,
        (None, None) => DEFAULT_SEED,
    };

    Ok(Request::Run(RunConfig {
        source,
        s,
        tol: flags.tol,
        max_m: flags.max_m,
        seed,
        m: flags.m,
        jmax: flags.jmax,
        k1: flags.k1,
        k2: flags.k2,
        out: flags.out,
        csv: flags.format.contains(&Format::Csv),
        json: flags.format.contains(&Format::Json),
    }))
}

/// Parses `argv` (including the program name) into a request.
pub fn parse_args<I, T>(argv: I, env_seed: Option<&str>) -> Result<Request, ArgsError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(ArgsError::Clap)?;
    resolve(cli, env_seed).map_err(ArgsError::Usage)
}

#[derive(Debug)]
pub enum ArgsError {
    /// Includes `--help` and `--version`, which are not failures.
    Clap(clap::Error),
    Usage(UsageError),
}

/// Short description of each registered scenario for `list`.
pub fn scenario_listing() -> Vec<String> {
    SCENARIO_IDS
        .iter()
        .map(|id| {
            let sc = Scenario::from_registry(id, 1).expect("registry id");
            let (k1, k2) = Scenario::default_k(id).unwrap_or((1, 0));
            let what = match *id {
                "ex4.1" | "ex4.2" => "four small eigenvalues, one isolated",
                "ex4.3" => "one isolated smallest eigenvalue",
                "ex4.4" => "clustered smallest eigenvalues",
                "ex4.5" => "repeated smallest eigenvalue",
                _ => "IC(0) preconditioned 2D Poisson",
            };
            format!("{id}\tn={}\tk1={k1}\tk2={k2}\t{what}", sc.dim())
        })
        .collect()
}
