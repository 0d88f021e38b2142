//! `sb-meme`: batch pipeline for two-sleeping-beauty memes.
//!
//! Stages communicate through files in `--out-dir`:
//! `detect` writes profiles.json, `fit` models.json, `simulate`
//! simulated.csv, `stats` stats.json and `eval` eval.json, the last two with
//! figure-data CSVs next to them. `synth` writes a synthetic corpus.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sb_meme_core::{Granularity, PMode, DEFAULT_ALPHA};

mod commands;
mod figures;

#[derive(Parser, Debug)]
#[command(name = "sb-meme", version, about = "Detect and model memes with two sleeping beauties")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: RunConfig,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Identify two-beauty profiles and write profiles.json.
    Detect,
    /// Fit two-generation Bass models and write models.json.
    Fit,
    /// Simulate fitted models and write simulated.csv.
    Simulate,
    /// Corpus statistics: stats.json and fig3.csv to fig7.csv.
    Stats,
    /// Fit quality: eval.json and fig8.csv to fig10.csv.
    Eval,
    /// Write a seeded synthetic corpus (synth.csv, synth.truth.json).
    Synth,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Corpus file (CSV `meme_id,t,value` or JSON).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Directory for reports and figure data.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, default_value = "day")]
    pub granularity: Granularity,
    /// Spike-function neighbourhood half-width.
    #[arg(long, global = true, default_value_t = 5)]
    pub k: usize,
    /// Spike-function significance multiplier.
    #[arg(long, global = true, default_value_t = 0.5)]
    pub h: f64,
    /// Beauty-coefficient threshold multiplier.
    #[arg(long, global = true, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Innovation coefficients: per meme (observed) or corpus averages.
    #[arg(long, global = true, default_value = "corpus-mean")]
    pub p_mode: PMode,
    /// Seed for `synth`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Synthetic memes per grid cell for `synth`.
    #[arg(long, global = true, default_value_t = 4)]
    pub per_cell: usize,
    /// Add Poisson noise to synthetic series.
    #[arg(long, global = true)]
    pub noise: bool,
}

/// Marks errors caused by empty or insufficient data (exit code 2).
#[derive(Debug)]
pub struct Insufficient(pub String);

impl std::fmt::Display for Insufficient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Insufficient {}

fn init_thread_pool() -> anyhow::Result<()> {
    if let Ok(raw) = std::env::var("SB_MEME_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("SB_MEME_THREADS must be a positive integer, got `{raw}`"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_thread_pool().and_then(|()| {
        let c = &cli.config;
        match cli.command {
            Command::Detect => commands::detect(c),
            Command::Fit => commands::fit(c),
            Command::Simulate => commands::simulate(c),
            Command::Stats => commands::stats(c),
            Command::Eval => commands::eval(c),
            Command::Synth => commands::synth(c),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Insufficient>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
