use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use ldis_core::pipeline::{execute, LoadedConfig, RunConfig, RunOptions, Stage};

/// Location data integrity scoring for planting-site catalogs.
#[derive(Debug, Parser)]
#[command(name = "ldis", version)]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads per stage; 0 uses every core.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for bootstrap and control sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Read, filter and harmonize the catalog; writes sites.csv and dropped.csv.
    Ingest,
    /// Nesting, duplicate and admin-unit checks; writes relations.csv and site_flags.csv.
    Relate,
    /// Overlay land cover, roads, loss, terrain and climate; writes augment.csv.
    Augment,
    /// Site and annulus vegetation index series; writes veg_series.csv and veg_bands.csv.
    Veg,
    /// Indicator outcomes and scores; writes ldis_scores.csv.
    Score,
    /// Difference-in-differences fits; writes did.json.
    Did {
        /// Fit a single panel CSV (unit_id,g,t,y) instead of the vegetation series.
        #[arg(long)]
        panel: Option<PathBuf>,
    },
    /// Synthetic control series; writes synth.json.
    Synth,
    /// Rebuild summary.json (and confusion.json) from an output directory.
    Report,
    /// Every stage in order.
    Run,
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("LDIS_LOG", "warn");
    env_logger::Builder::from_env(env).format_timestamp(None).init();
}

fn load_config(path: Option<&PathBuf>, stage: Stage, panel: bool) -> Result<LoadedConfig> {
    match path {
        Some(p) => RunConfig::load(p).with_context(|| format!("loading config {}", p.display())),
        None if stage == Stage::Report || (stage == Stage::Did && panel) => Ok(LoadedConfig {
            config: RunConfig::default(),
            source: None,
            base_dir: PathBuf::from("."),
        }),
        None => bail!("--config is required for `{}`", stage.as_str()),
    }
}

fn run(cli: Cli) -> Result<i32> {
    let (stage, panel) = match cli.command {
        Command::Ingest => (Stage::Ingest, None),
        Command::Relate => (Stage::Relate, None),
        Command::Augment => (Stage::Augment, None),
        Command::Veg => (Stage::Veg, None),
        Command::Score => (Stage::Score, None),
        Command::Did { panel } => (Stage::Did, panel),
        Command::Synth => (Stage::Synth, None),
        Command::Report => (Stage::Report, None),
        Command::Run => (Stage::Run, None),
    };
    let loaded = load_config(cli.config.as_ref(), stage, panel.is_some())?;
    let opts = RunOptions {
        out_dir: cli.out,
        workers: cli.workers,
        seed: cli.seed,
        panel,
    };
    let outcome = execute(stage, &loaded, &opts).with_context(|| format!("stage {} failed", stage.as_str()))?;
    for a in &outcome.artifacts {
        log::info!("wrote {}", a.display());
    }
    eprintln!(
        "{}: {} sites, {} files in {}",
        stage.as_str(),
        outcome.sites,
        outcome.artifacts.len(),
        outcome.out_dir.display()
    );
    Ok(outcome.status.code())
}

fn main() -> ExitCode {
    init_logging();
    // clap reports usage errors with status 2, which is reserved for partial runs
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
