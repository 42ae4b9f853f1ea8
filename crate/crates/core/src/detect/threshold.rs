use super::DetectConfig;
use crate::error::{Error, Result};
use crate::raster::{BinaryImage, GrayImage, IntegralImage};

/// Half width of the smoothing window: the window side is the odd number
/// `2 * round(window_frac * min(w, h) / 2) + 1`.
pub fn window_half_width(width: usize, height: usize, window_frac: f64) -> usize {
    (window_frac * width.min(height) as f64 / 2.0).round() as usize
}

/// Box filter through the integral image. Border windows are translated
/// inwards rather than cropped.
pub fn smooth(img: &GrayImage, cfg: &DetectConfig) -> Result<GrayImage> {
    let hw = window_half_width(img.width(), img.height(), cfg.window_frac);
    let ii = IntegralImage::build(img);
    let mut data = Vec::with_capacity(img.width() * img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            data.push(ii.windowed_mean(x, y, hw)?.clamp(0.0, 1.0));
        }
    }
    GrayImage::new(img.width(), img.height(), data)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdStats {
    pub mean: f64,
    pub std_dev: f64,
    pub threshold: f64,
}

/// Population mean and standard deviation of the local-mean image and the
/// resulting threshold.
pub fn local_mean_stats(local_mean: &GrayImage, threshold_sigmas: f64) -> ThresholdStats {
    let data = local_mean.data();
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std_dev = var.sqrt();
    let threshold = if threshold_sigmas.is_infinite() {
        f64::INFINITY
    } else {
        threshold_sigmas * std_dev
    };
    ThresholdStats { mean, std_dev, threshold }
}

/// Flags pixels exceeding their local mean by more than the threshold.
/// Ties are dark.
pub fn normalize_and_threshold(
    img: &GrayImage,
    local_mean: &GrayImage,
    cfg: &DetectConfig,
) -> Result<BinaryImage> {
    if img.width() != local_mean.width() || img.height() != local_mean.height() {
        return Err(Error::DimensionMismatch(
            img.width(),
            img.height(),
            local_mean.width(),
            local_mean.height(),
        ));
    }
    let t = local_mean_stats(local_mean, cfg.threshold_sigmas).threshold;
    let data = img
        .data()
        .iter()
        .zip(local_mean.data())
        .map(|(v, m)| v - m > t)
        .collect();
    BinaryImage::new(img.width(), img.height(), data)
}
