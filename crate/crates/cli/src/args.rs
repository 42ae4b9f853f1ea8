use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "conicpose", version, about = "Detect wheel ellipses and recover vehicle pose from them")]
pub struct Cli {
    /// JSON config file; flags override its values
    #[arg(long, env = "CONICPOSE_CONFIG", global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the bright ellipses in an image
    Detect {
        image: PathBuf,
        #[command(flatten)]
        detect: DetectFlags,
        /// Write JSON here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pick the most plausible wheel pair
    Wheels {
        image: PathBuf,
        #[command(flatten)]
        detect: DetectFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pose candidates from the wheel pair and a circle model
    Pose {
        image: PathBuf,
        /// Model JSON file, or one of the built-in names golf, audi, bmw
        #[arg(long)]
        model: Option<String>,
        #[command(flatten)]
        detect: DetectFlags,
        #[command(flatten)]
        upright: UprightFlags,
        /// Emit only the candidate at this 0-based rank
        #[arg(long)]
        select: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a fixture or a scene file to PGM and print its ground truth
    Synth {
        /// Fixture name (table, golf-1, ...) or path to a scene JSON file
        scene: String,
        /// Image path
        #[arg(long)]
        out: PathBuf,
        /// Ground-truth JSON path; stdout when absent
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        noise_std: Option<f64>,
    },
    /// Render a fixture, run the full pipeline and check the recovered pose
    Roundtrip {
        fixture: String,
        #[command(flatten)]
        detect: DetectFlags,
        #[command(flatten)]
        upright: UprightFlags,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        noise_std: Option<f64>,
        /// Also write the report as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct DetectFlags {
    #[arg(long)]
    pub window_frac: Option<f64>,
    #[arg(long)]
    pub threshold_sigmas: Option<f64>,
    #[arg(long)]
    pub min_blob_px: Option<usize>,
    #[arg(long)]
    pub mismatch_max: Option<f64>,
    #[arg(long)]
    pub area_consistency_frac: Option<f64>,
    #[arg(long)]
    pub min_area_frac: Option<f64>,
    #[arg(long)]
    pub max_area_frac: Option<f64>,
    #[arg(long)]
    pub orientation_tol_deg: Option<f64>,
    #[arg(long)]
    pub horizontal_tol_deg: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct UprightFlags {
    /// Assume the vehicle is upright (default)
    #[arg(long, overrides_with = "no_upright")]
    pub upright: bool,
    /// Keep all eight candidates
    #[arg(long)]
    pub no_upright: bool,
}

impl UprightFlags {
    pub fn resolve(&self) -> Option<bool> {
        match (self.upright, self.no_upright) {
            (_, true) => Some(false),
            (true, false) => Some(true),
            _ => None,
        }
    }
}
