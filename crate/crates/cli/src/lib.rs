//! Command-line front end: builds a scenario from flags, runs it and writes CSV/JSON artifacts.

pub mod args;
pub mod emit;
pub mod spectrum_file;

use std::io::Write;
use std::path::PathBuf;

use serde_json::{json, Value};

use blockcg::bounds::BoundConfig;
use blockcg::experiments::{run_scenario, ExperimentError, MatrixRecipe, RunArtifact, Scenario};

use args::{ArgsError, Request, RunConfig, Source};
use spectrum_file::{load_spectrum_file, SpectrumFileError};

/// Bound horizon used when `--m` is given without `--jmax` for a custom matrix.
pub const DEFAULT_JMAX: usize = 10;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] UsageError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumFileError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Spectrum(SpectrumFileError::Io(_)) => EXIT_FAILURE,
            CliError::Spectrum(_) => EXIT_USAGE,
            CliError::Experiment(ExperimentError::Invalid(_)) => EXIT_USAGE,
            CliError::Experiment(_) | CliError::Io(_) => EXIT_FAILURE,
        }
    }
}

fn source_json(source: &Source) -> Value {
    match source {
        Source::Example(id) => json!({ "kind": "example", "id": id }),
        Source::SpectrumFile(path) => json!({ "kind": "spectrum_file", "path": path.display().to_string() }),
        Source::Poisson { grid, ic0 } => json!({ "kind": "poisson", "grid": grid, "ic0": ic0 }),
    }
}

fn dedup(mut configs: Vec<BoundConfig>) -> Vec<BoundConfig> {
    let mut seen = Vec::new();
    configs.retain(|c| {
        let key = (c.m, c.j_max, c.k1, c.k2);
        !seen.contains(&key) && {
            seen.push(key);
            true
        }
    });
    configs
}

/// Applies the flags to the registry defaults (examples) or to an empty grid (custom matrices).
/// With `--m`, the grid is replaced by `m × (k1, k2)`; otherwise `--jmax`, `--k1`, `--k2`
/// override the corresponding fields of every registry configuration.
pub fn build_scenario(cfg: &RunConfig) -> Result<Scenario, CliError> {
    let (mut sc, default_k) = match &cfg.source {
        Source::Example(id) => {
            let sc = Scenario::from_registry(id, cfg.s)?;
            let k = Scenario::default_k(id).unwrap_or((1, 0));
            (sc, k)
        }
        Source::SpectrumFile(path) => {
            let values = load_spectrum_file(path)?;
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "spectrum".into());
            (Scenario::custom(id, MatrixRecipe::Spectrum(values), cfg.s), (1, 0))
        }
        Source::Poisson { grid, ic0 } => {
            let id = format!("poisson{grid}{}", if *ic0 { "-ic0" } else { "" });
            (Scenario::custom(id, MatrixRecipe::Poisson { grid: *grid, ic0: *ic0 }, cfg.s), (1, 0))
        }
    };
    if cfg.s > sc.dim() {
        return Err(UsageError(format!("--s {} exceeds the matrix order {}", cfg.s, sc.dim())).into());
    }
    if let Some(tol) = cfg.tol {
        sc.tol = tol;
    }
    sc.max_m = cfg.max_m;
    sc.seed = cfg.seed;

    let k1 = cfg.k1.unwrap_or(default_k.0);
    let k2 = cfg.k2.unwrap_or(default_k.1);
    if let Some(steps) = &cfg.m {
        let j_max = cfg.jmax.unwrap_or(DEFAULT_JMAX);
        sc.configs = steps.iter().map(|&m| BoundConfig::new(m, j_max, k1, k2)).collect();
    } else if cfg.jmax.is_some() || cfg.k1.is_some() || cfg.k2.is_some() {
        for c in &mut sc.configs {
            c.j_max = cfg.jmax.unwrap_or(c.j_max);
            c.k1 = cfg.k1.unwrap_or(c.k1);
            c.k2 = cfg.k2.unwrap_or(c.k2);
        }
    }
    sc.configs = dedup(std::mem::take(&mut sc.configs));
    Ok(sc)
}

#[derive(Debug)]
pub struct RunOutcome {
    pub artifact: RunArtifact,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    /// Zero iff every requested bound configuration completed.
    pub fn exit_code(&self) -> i32 {
        if self.artifact.all_configs_ok() {
            EXIT_OK
        } else {
            EXIT_FAILURE
        }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let sc = build_scenario(cfg)?;
    let artifact = run_scenario(&sc)?;
    let files = emit::emit(&artifact, source_json(&cfg.source), &cfg.out, cfg.csv, cfg.json)?;
    Ok(RunOutcome { artifact, files })
}

/// Full command-line behavior; returns the process exit code.
pub fn run_cli<I, T>(argv: I, env_seed: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let request = match args::parse_args(argv, env_seed) {
        Ok(r) => r,
        Err(ArgsError::Clap(e)) => {
            if !e.use_stderr() {
                let _ = write!(out, "{}", e.render());
                return EXIT_OK;
            }
            let rendered = e.to_string();
            let reason: Vec<&str> = rendered
                .lines()
                .take_while(|l| !l.trim().is_empty())
                .map(|l| l.trim().trim_start_matches("error: "))
                .collect();
            let _ = writeln!(err, "{}", reason.join(" "));
            return EXIT_USAGE;
        }
        Err(ArgsError::Usage(e)) => {
            let _ = writeln!(err, "{e}");
            return EXIT_USAGE;
        }
    };
    let cfg = match request {
        Request::List => {
            for line in args::scenario_listing() {
                let _ = writeln!(out, "{line}");
            }
            return EXIT_OK;
        }
        Request::Run(cfg) => cfg,
    };
    match execute(&cfg) {
        Ok(outcome) => {
            let art = &outcome.artifact;
            let _ = writeln!(
                out,
                "{}: s={} iterations={} converged={} onset={}",
                art.scenario.id,
                art.scenario.s,
                art.iterations(),
                art.converged(),
                art.onset.map_or_else(|| "none".to_string(), |o| o.to_string())
            );
            for c in &art.bounds {
                if let Err(e) = &c.result {
                    let _ = writeln!(err, "config m={} k1={} k2={}: {e}", c.config.m, c.config.k1, c.config.k2);
                }
            }
            for f in &outcome.files {
                let _ = writeln!(out, "wrote {}", f.display());
            }
            outcome.exit_code()
        }
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}
