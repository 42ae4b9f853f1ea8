//! Run configuration: built-in defaults, then the config file, then flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use conicpose::detect::DetectConfig;
use serde::Deserialize;

use crate::args::DetectFlags;
use crate::json::FORMAT;

/// Everything a config file may set. Unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub format: Option<u32>,
    pub window_frac: Option<f64>,
    pub threshold_sigmas: Option<f64>,
    pub min_blob_px: Option<usize>,
    pub mismatch_max: Option<f64>,
    pub area_consistency_frac: Option<f64>,
    pub min_area_frac: Option<f64>,
    pub max_area_frac: Option<f64>,
    pub orientation_tol_deg: Option<f64>,
    pub horizontal_tol_deg: Option<f64>,
    pub upright: Option<bool>,
    pub select: Option<usize>,
    pub seed: Option<u64>,
    pub noise_std: Option<f64>,
    pub model: Option<String>,
    pub out: Option<PathBuf>,
    pub tol_axle: Option<f64>,
    pub tol_quat: Option<f64>,
    pub tol_sigma_rel: Option<f64>,
    pub tol_shift_px: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        if let Some(v) = cfg.format {
            if v != FORMAT {
                bail!("config {} has format {v}, expected {FORMAT}", path.display());
            }
        }
        Ok(cfg)
    }

    pub fn detect_config(&self, flags: &DetectFlags) -> Result<DetectConfig> {
        let d = DetectConfig::default();
        let pick = |flag: Option<f64>, file: Option<f64>, default: f64| flag.or(file).unwrap_or(default);
        let deg = |v: Option<f64>| v.map(f64::to_radians);
        let cfg = DetectConfig {
            window_frac: pick(flags.window_frac, self.window_frac, d.window_frac),
            threshold_sigmas: pick(flags.threshold_sigmas, self.threshold_sigmas, d.threshold_sigmas),
            min_blob_px: flags.min_blob_px.or(self.min_blob_px).unwrap_or(d.min_blob_px),
            mismatch_max: pick(flags.mismatch_max, self.mismatch_max, d.mismatch_max),
            area_consistency_frac: pick(flags.area_consistency_frac, self.area_consistency_frac, d.area_consistency_frac),
            min_area_frac: pick(flags.min_area_frac, self.min_area_frac, d.min_area_frac),
            max_area_frac: pick(flags.max_area_frac, self.max_area_frac, d.max_area_frac),
            pair_orientation_tol: pick(deg(flags.orientation_tol_deg), deg(self.orientation_tol_deg), d.pair_orientation_tol),
            pair_horizontal_tol: pick(deg(flags.horizontal_tol_deg), deg(self.horizontal_tol_deg), d.pair_horizontal_tol),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Pass/fail limits for a round trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub axle: f64,
    pub quat: f64,
    pub sigma_rel: f64,
    pub shift_px: f64,
}

impl Tolerances {
    /// Single-circle scenes.
    pub const TABLE: Tolerances = Tolerances { axle: 0.04, quat: 0.03, sigma_rel: 0.02, shift_px: 5.0 };
    /// Two-wheel scenes.
    pub const CAR: Tolerances = Tolerances { axle: 0.04, quat: 0.03, sigma_rel: 0.03, shift_px: 10.0 };

    pub fn with_overrides(self, file: &ConfigFile) -> Self {
        Self {
            axle: file.tol_axle.unwrap_or(self.axle),
            quat: file.tol_quat.unwrap_or(self.quat),
            sigma_rel: file.tol_sigma_rel.unwrap_or(self.sigma_rel),
            shift_px: file.tol_shift_px.unwrap_or(self.shift_px),
        }
    }
}
