use std::f64::consts::{FRAC_PI_2, PI};

use super::{DetectConfig, DetectedEllipse};

/// Axis ratio above which an ellipse's orientation is too poorly defined to
/// compare, so it pairs with any orientation.
pub const ROUND_AXIS_RATIO: f64 = 0.95;

/// Two ellipses taken as the wheels on one side of a vehicle. `back` is the
/// one further left in the image; which physical wheel it is stays ambiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct WheelPair {
    pub back: DetectedEllipse,
    pub front: DetectedEllipse,
    /// Sum of the two mismatch ratios; lower is better.
    pub score: f64,
}

/// Angle between two undirected axes, in `[0, pi/2]`.
pub fn orientation_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

fn compatible(p: &DetectedEllipse, q: &DetectedEllipse, cfg: &DetectConfig) -> bool {
    let round = |e: &DetectedEllipse| e.a2 / e.a1 >= ROUND_AXIS_RATIO;
    if !round(p) && !round(q) && orientation_difference(p.orientation, q.orientation) > cfg.pair_orientation_tol {
        return false;
    }
    let d = q.mu - p.mu;
    if d.norm() == 0.0 {
        return false;
    }
    // angle of the centre line from horizontal, in [0, pi/2]
    let slope = d.y.abs().atan2(d.x.abs());
    slope <= cfg.pair_horizontal_tol.min(FRAC_PI_2)
}

/// Picks the compatible pair with the lowest summed mismatch among ellipses of
/// plausible size. Ties go to the pair found first in input order.
pub fn select_wheel_pair(
    ellipses: &[DetectedEllipse],
    width: usize,
    height: usize,
    cfg: &DetectConfig,
) -> Option<WheelPair> {
    let image_area = (width * height) as f64;
    let sized: Vec<&DetectedEllipse> = ellipses
        .iter()
        .filter(|e| {
            let f = e.area as f64 / image_area;
            f >= cfg.min_area_frac && f <= cfg.max_area_frac
        })
        .collect();

    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..sized.len() {
        for j in i + 1..sized.len() {
            if !compatible(sized[i], sized[j], cfg) {
                continue;
            }
            let score = sized[i].mismatch_ratio + sized[j].mismatch_ratio;
            if best.map_or(true, |(s, _, _)| score < s) {
                best = Some((score, i, j));
            }
        }
    }
    let (score, i, j) = best?;
    let (p, q) = (sized[i], sized[j]);
    let (back, front) = if (p.mu.x, p.mu.y) <= (q.mu.x, q.mu.y) { (p, q) } else { (q, p) };
    Some(WheelPair { back: back.clone(), front: front.clone(), score })
}
