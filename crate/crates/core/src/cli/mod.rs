//! Command-line front end.
//!
//! Exit codes: 0 when every tolerance check passes, 1 when a check fails or a
//! computation errors, 2 for usage and configuration errors (in which case
//! nothing is written).

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::output::{ArtifactEntry, ArtifactSet};
use commands::{Check, Outcome};
use config::{Conversion, Preset, RunConfig};

pub const MANIFEST_SCHEMA: &str = "supertransfer.manifest/1";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const OUT_ENV: &str = "SUPERTRANSFER_OUT";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "supertransfer", version, about = "Collective emission, transfer, dephasing and diffusion experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON configuration file; merged over the preset.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", env = OUT_ENV, default_value = "supertransfer-out")]
    pub out: PathBuf,

    /// Base RNG seed; overrides the configuration.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Worker threads for parallel grid evaluation (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,

    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,

    /// Override one configuration value, e.g. `--set diffusion.walkers=5000`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Dicke emission rates against exact matrix elements and short-time dynamics.
    Superradiance,
    /// Group-to-group transfer rates, short-time dynamics and Rabi frequencies.
    Supertransfer,
    /// Cooperative/normal sector decomposition and disorder-induced leakage.
    Sectors,
    /// Coherence decay scaling under independent and collective dephasing.
    Dephasing,
    /// Coherent-step random walk sweep and transport arithmetic.
    Diffusion,
    /// Every experiment above, one subdirectory each.
    All,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Superradiance => "superradiance",
            Command::Supertransfer => "supertransfer",
            Command::Sectors => "sectors",
            Command::Dephasing => "dephasing",
            Command::Diffusion => "diffusion",
            Command::All => "all",
        }
    }
}

const EXPERIMENTS: [Command; 5] =
    [Command::Superradiance, Command::Supertransfer, Command::Sectors, Command::Dephasing, Command::Diffusion];

#[derive(Debug, Serialize)]
struct Seeds {
    base: u64,
    diffusion: u64,
    sector_disorder: u64,
}

#[derive(Debug, Serialize)]
struct Stage {
    name: String,
    seconds: f64,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    schema: &'static str,
    command: &'static str,
    version: &'static str,
    arguments: Vec<String>,
    preset: Option<Preset>,
    config_file: Option<String>,
    overrides: &'a [String],
    config: &'a RunConfig,
    seeds: Seeds,
    workers: usize,
    unit_conversions: &'a [Conversion],
    total_seconds: f64,
    stages: Vec<Stage>,
    outputs: Vec<ArtifactEntry>,
    checks: &'a [Check],
    status: &'static str,
    error: Option<String>,
}

fn run_one(cmd: Command, cfg: &RunConfig) -> Result<Outcome> {
    match cmd {
        Command::Superradiance => commands::superradiance(&cfg.superradiance),
        Command::Supertransfer => commands::supertransfer(&cfg.supertransfer),
        Command::Sectors => commands::sectors(&cfg.sectors, cfg.seed),
        Command::Dephasing => commands::dephasing(&cfg.dephasing),
        Command::Diffusion => commands::diffusion(&cfg.diffusion),
        Command::All => {
            let mut all = Outcome::default();
            for sub in EXPERIMENTS {
                let o = run_one(sub, cfg)?;
                let prefix = sub.name();
                all.artifacts.extend(prefix, o.artifacts);
                all.checks.extend(o.checks.into_iter().map(|c| Check { name: format!("{prefix}: {}", c.name), ..c }));
                all.stages.extend(o.stages.into_iter().map(|(n, s)| (format!("{prefix}/{n}"), s)));
            }
            Ok(all)
        }
    }
}

/// Parse flags and layers into a resolved configuration.
pub fn resolve(cli: &Cli) -> Result<(RunConfig, Vec<Conversion>)> {
    let text = match &cli.config {
        Some(p) => Some(
            std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", p.display())))?,
        ),
        None => None,
    };
    let mut value = config::layered(cli.preset, text.as_deref(), &cli.overrides)?;
    if let Some(seed) = cli.seed {
        config::merge(&mut value, serde_json::json!({ "seed": seed }));
    }
    RunConfig::resolve(value)
}

fn write_outputs(dir: &Path, artifacts: &ArtifactSet) -> Result<Vec<ArtifactEntry>> {
    std::fs::create_dir_all(dir)?;
    artifacts.write_all(dir)
}

/// Run the CLI on `args` (including the program name); returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let (cfg, conversions) = match resolve(&cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    match cli.workers {
        Some(0) => {
            eprintln!("error: --workers must be at least 1");
            return EXIT_USAGE;
        }
        Some(n) => builder = builder.num_threads(n),
        None => {}
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_USAGE;
        }
    };
    let start = Instant::now();
    let result = pool.install(|| run_one(cli.command, &cfg));
    let total_seconds = start.elapsed().as_secs_f64();
    let (outcome, error) = match result {
        Ok(o) => (o, None),
        Err(e) => {
            eprintln!("error: {e}");
            (Outcome::default(), Some(e.to_string()))
        }
    };
    let outputs = match write_outputs(&cli.out, &outcome.artifacts) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: cannot write outputs to {}: {e}", cli.out.display());
            return EXIT_FAIL;
        }
    };
    let passed = error.is_none() && outcome.passed();
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA,
        command: cli.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        arguments: args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
        preset: cli.preset,
        config_file: cli.config.as_ref().map(|p| p.display().to_string()),
        overrides: &cli.overrides,
        config: &cfg,
        seeds: Seeds { base: cfg.seed, diffusion: cfg.diffusion.walk.rng_seed, sector_disorder: cfg.seed },
        workers: pool.current_num_threads(),
        unit_conversions: &conversions,
        total_seconds,
        stages: outcome.stages.iter().map(|(n, s)| Stage { name: n.clone(), seconds: *s }).collect(),
        outputs,
        checks: &outcome.checks,
        status: if error.is_some() {
            "error"
        } else if passed {
            "pass"
        } else {
            "fail"
        },
        error,
    };
    let manifest_text = match serde_json::to_string_pretty(&manifest) {
        Ok(t) => t + "\n",
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAIL;
        }
    };
    if let Err(e) = std::fs::write(cli.out.join(MANIFEST_FILE), manifest_text) {
        eprintln!("error: cannot write manifest: {e}");
        return EXIT_FAIL;
    }
    for c in &outcome.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("{} outputs written to {}", manifest.outputs.len(), cli.out.display());
    if passed {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
