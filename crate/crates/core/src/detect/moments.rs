use nalgebra::{Matrix2, Vector2};

use super::Pixel;
use crate::error::{Error, Result};

/// Zeroth, first and central second moments of a pixel set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub area: usize,
    pub mean: Vector2<f64>,
    /// Population covariance (divides by `n`).
    pub cov: Matrix2<f64>,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `num / den` reduced to lowest terms before the division, so the result is
/// correctly rounded whenever the reduced fraction fits in 53 bits.
fn ratio(num: i128, den: i128) -> f64 {
    debug_assert!(den > 0);
    let g = gcd(num.unsigned_abs(), den as u128).max(1) as i128;
    (num / g) as f64 / (den / g) as f64
}

/// Area, mean and covariance, accumulated with exact integer sums.
pub fn blob_moments(pixels: &[Pixel]) -> Result<Moments> {
    if pixels.is_empty() {
        return Err(Error::EmptyBlob);
    }
    let n = pixels.len() as i128;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0i128, 0i128, 0i128, 0i128, 0i128);
    for &(x, y) in pixels {
        let (x, y) = (x as i128, y as i128);
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    // n^2 cov = n Sxx - Sx^2, exact in integers
    let n2 = n * n;
    let cxx = ratio(n * sxx - sx * sx, n2);
    let cyy = ratio(n * syy - sy * sy, n2);
    let cxy = ratio(n * sxy - sx * sy, n2);
    Ok(Moments {
        area: pixels.len(),
        mean: Vector2::new(ratio(sx, n), ratio(sy, n)),
        cov: Matrix2::new(cxx, cxy, cxy, cyy),
    })
}
