use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fidroute_core::noisesim::{RoutingMode, Shots};
use fidroute_core::router::Method;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "fidroute",
    version,
    about = "Noise-aware qubit routing pipeline"
)]
pub struct Cli {
    /// Root seed; every random draw comes from a named substream of it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Write a device coupling graph.
    GenTopology(GenTopology),
    /// Write synthetic calibration snapshots for a device.
    GenCalibration(GenCalibration),
    /// Run random routed-CNOT experiments and record their fidelities.
    GenData(GenData),
    /// Split a dataset into length-balanced training and validation sets.
    Prepare(Prepare),
    /// Fit the fidelity model.
    Train(Train),
    /// Score the model on a validation set.
    Evaluate(Evaluate),
    /// Route an OpenQASM 2 circuit onto a device.
    Route(Route),
    /// Benchmark the model's paths against shortest paths on random CNOTs.
    Compare(Compare),
    /// Re-run the command recorded in a manifest.
    Replay(Replay),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenTopology(_) => "gen-topology",
            Command::GenCalibration(_) => "gen-calibration",
            Command::GenData(_) => "gen-data",
            Command::Prepare(_) => "prepare",
            Command::Train(_) => "train",
            Command::Evaluate(_) => "evaluate",
            Command::Route(_) => "route",
            Command::Compare(_) => "compare",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Line,
    Ring,
    Grid,
    HeavyHex,
}

#[derive(Debug, Args, Serialize)]
pub struct GenTopology {
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    /// The 127-qubit heavy-hex reference device.
    #[arg(long)]
    pub reference: bool,
    /// Qubit count for line and ring.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct GenCalibration {
    #[arg(long)]
    pub topology: PathBuf,
    /// Number of snapshots.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub count: u32,
    /// Edges per snapshot planted with error rate 1.0.
    #[arg(long, default_value_t = 0)]
    pub fail_edges: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

pub fn parse_shots(s: &str) -> Result<Shots, String> {
    if s == "exact" {
        return Ok(Shots::Exact);
    }
    match s.parse::<u32>() {
        Ok(0) => Err("shot count must be at least 1".into()),
        Ok(n) => Ok(Shots::Count(n)),
        Err(_) => Err(format!("expected `exact` or a shot count, got `{s}`")),
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GenData {
    #[arg(long)]
    pub topology: PathBuf,
    #[arg(long)]
    pub calibrations: PathBuf,
    #[arg(long, default_value_t = 4050, value_parser = clap::value_parser!(u64).range(1..))]
    pub num: u64,
    #[arg(long, default_value_t = 2)]
    pub min_len: usize,
    #[arg(long, default_value_t = 100)]
    pub max_len: usize,
    /// `exact` or shots per tomography setting.
    #[arg(long, default_value = "exact", value_parser = parse_shots)]
    pub shots: Shots,
    #[arg(long, default_value = "permute")]
    pub mode: RoutingMode,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct Prepare {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ModelInputs {
    #[arg(long)]
    pub topology: PathBuf,
    #[arg(long)]
    pub calibrations: PathBuf,
    /// Path slots in the feature layout.
    #[arg(long, default_value_t = 100)]
    pub lmax: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct Train {
    #[arg(long)]
    pub train: PathBuf,
    #[command(flatten)]
    pub inputs: ModelInputs,
    #[arg(long, default_value_t = 200)]
    pub rounds: usize,
    #[arg(long, default_value_t = 6)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub min_child_weight: f64,
    #[arg(long, default_value_t = 0.0)]
    pub min_gain: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct Evaluate {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub validation: PathBuf,
    #[arg(long)]
    pub topology: PathBuf,
    #[arg(long)]
    pub calibrations: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct RoutingFlags {
    #[arg(long, default_value_t = fidroute_core::topology::DEFAULT_SLACK)]
    pub slack: usize,
    #[arg(long, default_value_t = fidroute_core::topology::DEFAULT_CAP)]
    pub cap: usize,
    #[arg(long, default_value = "permute")]
    pub mode: RoutingMode,
}

#[derive(Debug, Args, Serialize)]
pub struct Route {
    #[arg(long)]
    pub circuit: PathBuf,
    #[arg(long)]
    pub topology: PathBuf,
    /// Calibration snapshot (JSON document).
    #[arg(long)]
    pub calibration: PathBuf,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value = "xgswap")]
    pub method: Method,
    #[command(flatten)]
    pub routing: RoutingFlags,
    /// Routed circuit; the report and manifest are written beside it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct Compare {
    #[arg(long)]
    pub topology: PathBuf,
    #[arg(long)]
    pub calibration: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 313, value_parser = clap::value_parser!(u64).range(1..))]
    pub pairs: u64,
    #[arg(long, default_value_t = 3)]
    pub min_len: usize,
    #[arg(long, default_value_t = 27)]
    pub max_len: usize,
    #[arg(long, default_value = "exact", value_parser = parse_shots)]
    pub shots: Shots,
    #[command(flatten)]
    pub routing: RoutingFlags,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct Replay {
    #[arg(long)]
    pub manifest: PathBuf,
}
