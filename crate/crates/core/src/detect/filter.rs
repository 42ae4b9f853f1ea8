use nalgebra::{Matrix2, Vector2};

use super::{blob_moments, Blob, DetectConfig};
use crate::conic::EllipseCov;

/// A blob accepted as an ellipse.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectedEllipse {
    pub label: usize,
    pub mu: Vector2<f64>,
    pub cov: Matrix2<f64>,
    /// Semi-axes, `a1 >= a2`.
    pub a1: f64,
    pub a2: f64,
    /// Major-axis angle from +x, radians.
    pub orientation: f64,
    /// Symmetric difference with the equivalent ellipse over the blob size.
    pub mismatch_ratio: f64,
    /// Blob pixel count.
    pub area: usize,
}

impl DetectedEllipse {
    pub fn ellipse(&self) -> EllipseCov {
        EllipseCov { mu: self.mu, cov: self.cov }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    /// Empty blob or a covariance that is not positive definite (e.g. a line).
    Degenerate,
    /// Pixel count disagrees with the ellipse area implied by the covariance.
    AreaInconsistent { relative_error: f64 },
    MismatchTooLarge { ratio: f64 },
}

/// Number of integer points inside `e`, not clipped to any image.
fn lattice_count(e: &EllipseCov) -> usize {
    let ext = e.half_extents();
    let (xa, xb) = ((e.mu.x - ext.x).floor() as i64 - 1, (e.mu.x + ext.x).ceil() as i64 + 1);
    let (ya, yb) = ((e.mu.y - ext.y).floor() as i64 - 1, (e.mu.y + ext.y).ceil() as i64 + 1);
    let mut n = 0;
    for y in ya..=yb {
        for x in xa..=xb {
            if e.contains(Vector2::new(x as f64, y as f64)) {
                n += 1;
            }
        }
    }
    n
}

/// Accepts a blob whose pixel set is close to the ellipse
/// `(p - mu)^T C^-1 (p - mu) <= 4` built from its own moments.
pub fn ellipse_filter(blob: &Blob, cfg: &DetectConfig) -> Result<DetectedEllipse, Rejection> {
    let m = blob_moments(&blob.pixels).map_err(|_| Rejection::Degenerate)?;
    let e = EllipseCov::new(m.mean, m.cov).map_err(|_| Rejection::Degenerate)?;
    let area = m.area as f64;

    let relative_error = (area - e.area()).abs() / area;
    if relative_error > cfg.area_consistency_frac {
        return Err(Rejection::AreaInconsistent { relative_error });
    }

    let inside = blob
        .pixels
        .iter()
        .filter(|&&(x, y)| e.contains(Vector2::new(x as f64, y as f64)))
        .count();
    let sym_diff = lattice_count(&e) + m.area - 2 * inside;
    let ratio = sym_diff as f64 / area;
    if ratio > cfg.mismatch_max {
        return Err(Rejection::MismatchTooLarge { ratio });
    }

    let axes = e.axes();
    Ok(DetectedEllipse {
        label: blob.label,
        mu: m.mean,
        cov: m.cov,
        a1: axes.a1,
        a2: axes.a2,
        orientation: axes.orientation(),
        mismatch_ratio: ratio,
        area: m.area,
    })
}
