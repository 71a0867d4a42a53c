//! `sequil`: batch entry points over the sequil-core library.

mod commands;
mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sequil_core::models::ModelKind;
use sequil_core::simulate::Protocol;
use sequil_core::stats::HitUnit;
use sequil_core::Error;

#[derive(Debug, Parser)]
#[command(name = "sequil", version, about = "S(epsilon) equilibrium analysis, rival model fits and simulation")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "SEQUIL_THREADS")]
    pub threads: Option<usize>,
    /// TOML file with default settings; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Also write the printed table(s) as CSV. With several tables the
    /// files are named `<stem>-<table>.csv`.
    #[arg(long, global = true, value_name = "FILE")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Symmetric,
    Product,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// S(epsilon) choice sets of a game, with optional belief sets and figure.
    Analyze {
        /// Bundled game id or path to a game file.
        game: String,
        /// Error rate ε in (0, 1].
        #[arg(long)]
        epsilon: f64,
        /// Lattice resolution (cells per edge).
        #[arg(long)]
        grid: Option<usize>,
        /// Geometry mode; by default symmetric for symmetric games.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// List the belief set of each choice set.
        #[arg(long)]
        beliefs: bool,
        /// Keep pattern sets whose beliefs are all degenerate.
        #[arg(long)]
        all: bool,
        /// Write a ternary (3 strategies) or unit-square (2x2) figure.
        #[arg(long, value_name = "FILE")]
        svg: Option<PathBuf>,
        /// Write the regions as JSON.
        #[arg(long, value_name = "FILE")]
        json: Option<PathBuf>,
    },
    /// Sampled prediction curve of a one-parameter model.
    Curve {
        /// Bundled game id or path to a game file.
        game: String,
        /// logit, levelk, eps-perfect or eps-proper.
        #[arg(long, value_parser = parse_model)]
        model: ModelKind,
        /// Number of samples along the curve.
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Largest λ (logit) or τ (levelk); ε always runs over (0, 1].
        #[arg(long)]
        max: Option<f64>,
        /// Write the curve as JSON.
        #[arg(long, value_name = "FILE")]
        json: Option<PathBuf>,
        /// Draw the curve on the simplex (symmetric three-strategy games).
        #[arg(long, value_name = "FILE")]
        svg: Option<PathBuf>,
    },
    /// Maximum-likelihood fits per game and pooled.
    Fit {
        /// Observation CSV.
        data: PathBuf,
        #[command(flatten)]
        games: GamesArg,
        /// Repeatable; all models when absent.
        #[arg(long, value_parser = parse_model)]
        model: Vec<ModelKind>,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Measure of predictive success of S(epsilon), per game and pooled.
    Mps {
        /// Observation CSV.
        data: PathBuf,
        #[command(flatten)]
        games: GamesArg,
        /// What counts as one data point: subject, round or session.
        #[arg(long, value_parser = parse_unit)]
        unit: Option<HitUnit>,
        /// ε grid `i / steps`.
        #[arg(long)]
        steps: Option<usize>,
        /// Lattice resolution (cells per edge).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Diagnostics of stated beliefs.
    Beliefs {
        /// Observation CSV.
        data: PathBuf,
        #[command(flatten)]
        games: GamesArg,
        /// Permutation resamples for the rational-expectations test.
        #[arg(long)]
        resamples: Option<usize>,
        /// Seed of the permutation test.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit on every k-subset of games and score the held-out games.
    Oos {
        /// Observation CSV.
        data: PathBuf,
        #[command(flatten)]
        games: GamesArg,
        /// Repeatable; all models when absent.
        #[arg(long, value_parser = parse_model)]
        model: Vec<ModelKind>,
        /// In-sample subset size; repeatable.
        #[arg(long, required = true)]
        k: Vec<usize>,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Simulated experimental sessions, written as observation CSV.
    Simulate {
        /// Bundled game id or path to a game file.
        game: String,
        /// logit, levelk, eps-perfect, eps-proper, or S (a fixed profile
        /// inside S(param) but outside smaller sets).
        #[arg(long, value_parser = parse_model)]
        model: ModelKind,
        /// λ (logit), τ (levelk) or ε (eps-perfect, eps-proper, S).
        #[arg(long)]
        param: f64,
        /// Subjects per session. Defaults to 8, or 9 for three-player games.
        #[arg(long)]
        subjects: Option<usize>,
        /// Rounds per session.
        #[arg(long, default_value_t = 15)]
        rounds: usize,
        /// Seed of the first session; later sessions use seed+1, seed+2, ...
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of sessions.
        #[arg(long, default_value_t = 1)]
        sessions: usize,
        /// Matching: perfect-stranger or minimal-repeat.
        #[arg(long, value_parser = parse_protocol, default_value = "minimal-repeat")]
        protocol: Protocol,
        /// Dirichlet concentration of stated beliefs; 0 states the model
        /// belief exactly.
        #[arg(long, default_value_t = 50.0)]
        concentration: f64,
        /// Output file; stdout when absent.
        #[arg(long, short, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// KS distances and Wilcoxon tests between models' per-game fits.
    Compare {
        /// CSV with columns game, model, g_bar and optionally n_obs (the
        /// output of `fit --csv`).
        fits: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct GamesArg {
    /// Directory of game files; bundled games when absent.
    #[arg(long, value_name = "DIR")]
    pub games: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Upper end of the λ grid (logit).
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Upper end of the τ grid (levelk).
    #[arg(long)]
    pub tau_max: Option<f64>,
    /// ε grid `i / s_steps` for the S model.
    #[arg(long)]
    pub s_steps: Option<usize>,
    /// Lattice resolution for the S model.
    #[arg(long)]
    pub grid: Option<usize>,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.to_ascii_lowercase().parse().map_err(|e: Error| e.to_string())
}

fn parse_unit(s: &str) -> Result<HitUnit, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_protocol(s: &str) -> Result<Protocol, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numerical(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sequil: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
