use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cluster_games::games::GameKind;

mod commands;
mod config;

use config::{CliError, ExperimentConfig, Format, NoiseSource, ReadoutSource};

/// Nonlocal games on cyclic cluster states: classical bounds, noisy play, tomography and noise fits.
#[derive(Parser, Debug)]
#[command(name = "cluster-games", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// JSON file with default settings; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_game)]
    game: Option<GameKind>,
    /// full, mermin55, hlf8, hlf5 or hlfn5.
    #[arg(long, global = true)]
    inputs: Option<String>,
    /// Cycle length.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Classical circuit depth (bounds only; default: 0 and 1).
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Shots per input (play) or per setting (tomo, fit).
    #[arg(long, global = true)]
    shots: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `none`, `fitted` or a NoiseParams JSON file.
    #[arg(long, global = true, value_name = "FILE|none|fitted")]
    noise: Option<String>,
    /// Readout confusion JSON file, or `none`.
    #[arg(long, global = true, value_name = "FILE|none")]
    readout: Option<String>,
    /// Directory for artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Format of the summary written to stdout.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, env = "CLUSTER_GAMES_WORKERS")]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Play the quantum strategy on the simulated device.
    Play,
    /// Optimal classical success probability at bounded depth.
    Bounds,
    /// Simulate stabilizer tomography of the cycle state.
    Tomo {
        /// `table` uses the 37-setting grouping of the reference data (n = 6 only), `greedy` a fresh cover.
        #[arg(long, value_enum, default_value_t = commands::PlanChoice::Auto)]
        plan: commands::PlanChoice,
    },
    /// Grid-search the gate error rates against reference stabilizer data.
    Fit {
        /// Table CSV or tomo.json; defaults to the bundled reference table.
        #[arg(long, value_name = "FILE", conflicts_with = "truth")]
        reference: Option<PathBuf>,
        /// Use the raw column of a table CSV instead of the SPAM-corrected one.
        #[arg(long)]
        raw: bool,
        /// Synthesize the reference at `p1d,p2XX,p2d` instead.
        #[arg(long, value_name = "P1D,P2XX,P2D", value_delimiter = ',')]
        truth: Option<Vec<f64>>,
        /// Shots per setting for a synthetic reference.
        #[arg(long, default_value_t = 100_000)]
        reference_shots: usize,
        /// FitGrid JSON; defaults to the built-in grid.
        #[arg(long, value_name = "FILE")]
        grid: Option<PathBuf>,
    },
    /// Summarize the artifacts in --out into a game table plus stabilizer table.
    Report,
}

fn parse_game(s: &str) -> Result<GameKind, String> {
    s.parse().map_err(|e: cluster_games::games::GameError| e.to_string())
}

impl CommonArgs {
    fn resolve(self) -> Result<ExperimentConfig, CliError> {
        let base = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        let flags = ExperimentConfig {
            game: self.game,
            inputs: self.inputs,
            n: self.n,
            depth: self.depth,
            shots: self.shots,
            seed: self.seed,
            noise: self.noise.map(NoiseSource::Named),
            readout: self.readout.map(ReadoutSource::Named),
            out: self.out,
            format: self.format,
            workers: self.workers,
        };
        Ok(base.overlay(flags))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.common.resolve()?;
    if let Some(w) = cfg.workers {
        if w == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Play => commands::play(&cfg),
        Command::Bounds => commands::bounds(&cfg),
        Command::Tomo { plan } => commands::tomo(&cfg, plan),
        Command::Fit { reference, raw, truth, reference_shots, grid } => {
            let truth = match truth.as_deref() {
                None => None,
                Some(&[a, b, c]) => Some((a, b, c)),
                Some(_) => return Err(CliError::Config("--truth takes three comma-separated rates".into())),
            };
            commands::fit(&cfg, &commands::FitArgs { reference, raw, truth, reference_shots, grid })
        }
        Command::Report => commands::report(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
