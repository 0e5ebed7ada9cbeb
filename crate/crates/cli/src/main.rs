//! `navflow` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or config, 3 file I/O or format,
//! 4 motion estimation, 5 labeling, 6 routing, 7 simulation, 8 masking,
//! 9 metrics. Errors are written to stderr as one JSON object per line.

mod commands;
mod config;
mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::config::RunConfig;
use crate::error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "navflow", version, about = "Flow-based heading labels, synthetic routes and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Base seed for every random choice [default: 0, or `seed` from --config]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML run configuration supplying defaults per subcommand
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (a directory for `simulate`)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic episode: depth and flow rasters plus ground truth
    Simulate(SimulateArgs),
    /// Estimate per-frame yaw rate from flow and depth rasters
    Estimate(EstimateArgs),
    /// Turn a yaw series into eight-way direction labels
    Label(LabelArgs),
    /// Assemble synthetic paths from an annotated topological map
    Genpaths(GenpathsArgs),
    /// Plan masking boxes for augmentation
    Mask(MaskArgs),
    /// Score predicted labels against ground truth
    Evaluate(EvaluateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Estimate(_) => "estimate",
            Command::Label(_) => "label",
            Command::Genpaths(_) => "genpaths",
            Command::Mask(_) => "mask",
            Command::Evaluate(_) => "evaluate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Five 90° turns separated by straight stretches
    FiveTurns,
    /// One 90° left turn
    LTurn,
    /// Straight walk
    Straight,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Trajectory to render [default: five-turns]
    #[arg(long, value_enum)]
    pub scenario: Option<Scenario>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    RigidBody,
    AsPrinted,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Dataset manifest; uses its first episode, or the one named by --episode
    #[arg(long, conflicts_with_all = ["flow", "depth", "intrinsics"])]
    pub manifest: Option<PathBuf>,
    #[arg(long, requires = "manifest")]
    pub episode: Option<String>,
    /// Directory of flow_NNNNN.navr rasters
    #[arg(long, requires_all = ["depth", "intrinsics"])]
    pub flow: Option<PathBuf>,
    /// Directory of depth_NNNNN.navr rasters, one per flow raster
    #[arg(long)]
    pub depth: Option<PathBuf>,
    /// Camera intrinsics document
    #[arg(long)]
    pub intrinsics: Option<PathBuf>,
    /// Frame rate recorded in the output [default: 30, or the manifest's]
    #[arg(long)]
    pub fps: Option<f64>,
    /// Pixels sampled per frame [default: 200]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Interaction matrix [default: rigid-body]
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LabelModeArg {
    HeadingLookahead,
    RateThreshold,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    #[command(flatten)]
    pub common: Common,
    /// Yaw document
    #[arg(long)]
    pub yaw: PathBuf,
    /// Centered smoothing window in frames, odd [default: 15]
    #[arg(long)]
    pub window: Option<usize>,
    /// Lookahead in frames [default: two seconds at the series' fps]
    #[arg(long)]
    pub lookahead: Option<usize>,
    /// Labeling rule [default: heading-lookahead]
    #[arg(long, value_enum)]
    pub mode: Option<LabelModeArg>,
}

#[derive(Debug, Args)]
pub struct GenpathsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Map file with triplet annotations
    #[arg(long)]
    pub map: PathBuf,
    /// Number of paths [default: 10]
    #[arg(long)]
    pub count: Option<usize>,
    /// Also use the reversed footage of every annotated triplet
    #[arg(long)]
    pub with_reversals: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MaskMode {
    /// Uniformly placed boxes
    Rand,
    /// Box centers drawn from an attention raster
    Grad,
    /// Boxes from person detections
    People,
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub mode: MaskMode,
    /// Image width; taken from the attention raster in grad mode
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
    /// Number of frames to plan for [default: 1, or the detection frames]
    #[arg(long)]
    pub frames: Option<usize>,
    /// Boxes per frame [default: 3]
    #[arg(long)]
    pub count: Option<usize>,
    /// Smallest box side as a fraction of the image side [default: 0.1]
    #[arg(long)]
    pub min_frac: Option<f64>,
    /// Largest box side as a fraction of the image side [default: 0.3]
    #[arg(long)]
    pub max_frac: Option<f64>,
    /// Single-channel raster of non-negative attention weights (grad mode)
    #[arg(long)]
    pub attention: Option<PathBuf>,
    /// Detections document (people mode)
    #[arg(long)]
    pub detections: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Predicted labels document
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth labels document
    #[arg(long)]
    pub gt: PathBuf,
    /// Paths document; enables key-moment scoring
    #[arg(long)]
    pub paths: Option<PathBuf>,
    /// Which path in the paths document the labels cover
    #[arg(long, default_value_t = 0, requires = "paths")]
    pub path_index: usize,
    /// Key-moment window length in frames [default: 60]
    #[arg(long)]
    pub window: Option<usize>,
    /// Score each key-moment window by majority vote instead of per frame
    #[arg(long)]
    pub majority: bool,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let common = match &cli.command {
        Command::Simulate(a) => &a.common,
        Command::Estimate(a) => &a.common,
        Command::Label(a) => &a.common,
        Command::Genpaths(a) => &a.common,
        Command::Mask(a) => &a.common,
        Command::Evaluate(a) => &a.common,
    };
    let config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let seed = match common.seed {
        Some(s) => s,
        None => config.seed()?.unwrap_or(0),
    };
    match &cli.command {
        Command::Simulate(a) => commands::simulate(a, &config, seed),
        Command::Estimate(a) => commands::estimate(a, &config, seed),
        Command::Label(a) => commands::label(a, &config, seed),
        Command::Genpaths(a) => commands::genpaths(a, &config, seed),
        Command::Mask(a) => commands::mask(a, &config, seed),
        Command::Evaluate(a) => commands::evaluate(a, &config, seed),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            std::process::exit(exit::OK);
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or_default();
            let err = CliError::Usage(first.trim_start_matches("error: ").to_owned());
            eprintln!("{}", err.record("navflow"));
            std::process::exit(err.exit_code());
        }
    };
    let name = cli.command.name();
    if let Err(e) = run(&cli) {
        eprintln!("{}", e.record(name));
        std::process::exit(e.exit_code());
    }
}
