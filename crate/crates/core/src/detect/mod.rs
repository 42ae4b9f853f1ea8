//! Bright-ellipse detection.
//!
//! Pipeline, each stage in its own submodule:
//!
//! 1. box-smooth the image with a square window ([`smooth`]),
//! 2. subtract the local mean and threshold at a multiple of the local-mean
//!    image's standard deviation ([`normalize_and_threshold`]),
//! 3. label 8-connected bright regions, dropping small ones ([`label_components`]),
//! 4. close gaps radially towards the blob centre ([`star_fill`]),
//! 5. take area, mean and covariance ([`blob_moments`]),
//! 6. compare against the equivalent ellipse ([`ellipse_filter`]).
//!
//! [`select_wheel_pair`] then picks the two ellipses most likely to be the
//! wheels on one side of a vehicle.

mod fill;
mod filter;
mod label;
mod moments;
mod pair;
mod threshold;

pub use fill::{bresenham, star_fill};
pub use filter::{ellipse_filter, DetectedEllipse, Rejection};
pub use label::{label_components, Blob, Pixel};
pub use moments::{blob_moments, Moments};
pub use pair::{orientation_difference, select_wheel_pair, WheelPair};
pub use threshold::{local_mean_stats, normalize_and_threshold, smooth, window_half_width, ThresholdStats};

use crate::error::{Error, Result};
use crate::raster::GrayImage;

/// Smallest image side the detector accepts.
pub const MIN_IMAGE_SIDE: usize = 16;

/// Image area at which `min_blob_px` is specified.
pub const REFERENCE_AREA: f64 = 800.0 * 600.0;

/// Tunables for detection and wheel pairing. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectConfig {
    /// Smoothing window side as a fraction of the shorter image side.
    pub window_frac: f64,
    /// Threshold in standard deviations of the local-mean image.
    pub threshold_sigmas: f64,
    /// Minimum blob size at the 800x600 reference resolution; scaled with
    /// image area.
    pub min_blob_px: usize,
    pub mismatch_max: f64,
    /// Allowed `| |W| - 4 pi sqrt(det C) |` relative to `|W|`.
    pub area_consistency_frac: f64,
    pub min_area_frac: f64,
    pub max_area_frac: f64,
    pub pair_orientation_tol: f64,
    pub pair_horizontal_tol: f64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            window_frac: 0.10,
            threshold_sigmas: 1.0,
            min_blob_px: 20,
            mismatch_max: 0.20,
            area_consistency_frac: 0.15,
            min_area_frac: 0.0015,
            max_area_frac: 0.25,
            pair_orientation_tol: 0.26,
            pair_horizontal_tol: 0.52,
        }
    }
}

impl DetectConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_owned()));
        if !(self.window_frac > 0.0 && self.window_frac < 1.0) {
            return bad("window_frac must be in (0, 1)");
        }
        if !(self.threshold_sigmas >= 0.0) {
            return bad("threshold_sigmas must be non-negative");
        }
        let positive = [
            self.mismatch_max,
            self.area_consistency_frac,
            self.min_area_frac,
            self.max_area_frac,
            self.pair_orientation_tol,
            self.pair_horizontal_tol,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return bad("tolerances must be positive");
        }
        if self.min_area_frac >= self.max_area_frac {
            return bad("min_area_frac must be below max_area_frac");
        }
        Ok(())
    }

    /// `min_blob_px` rescaled from the reference resolution to `width x height`.
    pub fn effective_min_blob_px(&self, width: usize, height: usize) -> usize {
        let scaled = self.min_blob_px as f64 * (width * height) as f64 / REFERENCE_AREA;
        (scaled.round() as usize).max(1)
    }
}

/// Runs the full detector. Results are sorted by mismatch ratio, ties broken
/// by blob label, so output is independent of evaluation order.
pub fn detect_ellipses(img: &GrayImage, cfg: &DetectConfig) -> Result<Vec<DetectedEllipse>> {
    cfg.validate()?;
    let (w, h) = (img.width(), img.height());
    if w < MIN_IMAGE_SIDE || h < MIN_IMAGE_SIDE {
        return Err(Error::ImageTooSmall { width: w, height: h, min: MIN_IMAGE_SIDE });
    }
    let local_mean = smooth(img, cfg)?;
    let bright = normalize_and_threshold(img, &local_mean, cfg)?;
    let blobs = label_components(&bright, cfg.effective_min_blob_px(w, h));

    let mut found: Vec<DetectedEllipse> = blobs
        .iter()
        .filter_map(|blob| ellipse_filter(&star_fill(blob, w, h), cfg).ok())
        .collect();
    found.sort_by(|p, q| {
        p.mismatch_ratio
            .total_cmp(&q.mismatch_ratio)
            .then(p.label.cmp(&q.label))
    });
    Ok(found)
}
