use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "assayqc", version, about = "Assay quality metrics, simulation studies and hit selection")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Master seed for every random draw (required by simulate and calibrate).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Fixed histogram bin count instead of ceil(1 + log2 N).
    #[arg(long, global = true)]
    pub bins: Option<usize>,

    /// Directory for output files; a run manifest is written next to them.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quality metrics for each plate, or for a two-column group,value file.
    Metrics {
        /// Plate CSV (plate_id,row,col,role,value) or group CSV (group,value).
        input: PathBuf,
    },

    /// Runs a simulation study and writes one tidy CSV per panel.
    Simulate {
        /// fig1 … fig6.
        scenario: String,

        /// TOML file overriding the preset's parameters.
        #[arg(long)]
        config: Option<PathBuf>,
    },

    /// Hit threshold from a plate's controls, with optional held-out evaluation.
    Hits(HitsArgs),

    /// Null distribution of |GSSMD| for identical groups across sample sizes.
    Calibrate {
        #[arg(long, value_delimiter = ',', default_values_t = [10usize, 100, 1000, 10_000])]
        sizes: Vec<usize>,

        #[arg(long, default_value_t = 10_000)]
        trials: usize,

        #[arg(long, value_enum, default_value_t = DistArg::Normal)]
        dist: DistArg,

        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        location: f64,

        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },

    /// Re-runs a recorded invocation and checks its outputs byte for byte.
    Replay {
        manifest: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistArg {
    Normal,
    Lognormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Gssmd,
    Sigma,
    Ssmd,
    Logistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Auto,
    Higher,
    Lower,
}

#[derive(Debug, Args)]
pub struct HitsArgs {
    /// Plate CSV whose controls set the threshold.
    pub train: PathBuf,

    /// Plate CSV whose controls score the threshold.
    #[arg(long)]
    pub test: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = RuleArg::Gssmd)]
    pub rule: RuleArg,

    /// Overlap budget for the gssmd rule.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Multiplier for the sigma rule.
    #[arg(long)]
    pub k: Option<f64>,

    /// Target |SSMD| for the ssmd rule.
    #[arg(long)]
    pub beta: Option<f64>,

    #[arg(long, value_enum, default_value_t = DirectionArg::Auto)]
    pub direction: DirectionArg,

    /// Fit the logistic rule on ln(readout).
    #[arg(long)]
    pub log_transform: bool,

    /// Training plate id (default: first plate in the file).
    #[arg(long)]
    pub train_plate: Option<String>,

    /// Test plate id: a plate of --test (default: its first plate), or of
    /// the training file when --test is absent.
    #[arg(long)]
    pub test_plate: Option<String>,
}
