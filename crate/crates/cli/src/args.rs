use std::path::PathBuf;

use bellnet_core::classical::{DEFAULT_RESTARTS, DEFAULT_SEED};
use bellnet_core::hybrid::HybridSplit;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bellnet", version, about = "Correlation strengths in hybrid source networks")]
pub struct Cli {
    /// Report format on standard output.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a network document and print every diagnostic.
    Validate { file: PathBuf },

    /// List the segmented operators of a network.
    Operators { file: PathBuf },

    /// Closed-form bounds for a hybrid split.
    Bounds {
        #[arg(long)]
        ma: usize,
        /// Split `u,v,w` into classical, quantum and no-signaling sources.
        #[arg(long)]
        uvw: Option<HybridSplit>,
        #[arg(long)]
        p: Option<f64>,
    },

    /// Quantum value on the tailored stabilizer state.
    Quantum {
        file: PathBuf,
        #[arg(long)]
        p: Option<f64>,
        /// Cross-check every expectation with a dense state vector.
        #[arg(long)]
        dense_check: bool,
        /// Report sum-of-squares residuals.
        #[arg(long)]
        sos: bool,
    },

    /// Maximize the quantum value over a grid of type-A angles.
    Sweep {
        file: PathBuf,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },

    /// Local-hidden-variable maximum by exhaustive enumeration.
    Bruteforce {
        file: PathBuf,
        #[arg(long)]
        p: Option<f64>,
        /// Optimize over mixtures of deterministic strategies.
        #[arg(long)]
        mixture: bool,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
    },

    /// Value reached by the no-signaling boxes of a network.
    Ns {
        file: PathBuf,
        #[arg(long)]
        p: Option<f64>,
    },

    /// Bounds, achieved value and nonlocality degree of a network or split.
    Classify {
        #[arg(required_unless_present = "uvw", conflicts_with = "uvw")]
        file: Option<PathBuf>,
        #[arg(long)]
        uvw: Option<HybridSplit>,
        #[arg(long)]
        p: Option<f64>,
    },

    /// Run the full check matrix on the bundled networks.
    ReproducePaper {
        /// Directory whose network files replace the bundled ones.
        #[arg(long)]
        networks: Option<PathBuf>,
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
}
