use super::GrayImage;
use crate::error::{Error, Result};

/// Summed-area table with one row and column of zero padding.
///
/// `at(r, c)` is the sum of all intensities in rows `< r` and columns `< c`.
#[derive(Debug, Clone)]
pub struct IntegralImage {
    width: usize,
    height: usize,
    table: Vec<f64>,
}

impl IntegralImage {
    pub fn build(img: &GrayImage) -> Self {
        let (w, h) = (img.width(), img.height());
        let stride = w + 1;
        let mut table = vec![0.0; stride * (h + 1)];
        for y in 0..h {
            let mut row_sum = 0.0;
            for x in 0..w {
                row_sum += img.get(x, y);
                table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + row_sum;
            }
        }
        Self { width: w, height: h, table }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.table[row * (self.width + 1) + col]
    }

    /// Sum over columns `x0..x1` and rows `y0..y1` (half open).
    #[inline]
    pub fn rect_sum(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
        self.at(y1, x1) - self.at(y0, x1) - self.at(y1, x0) + self.at(y0, x0)
    }

    /// Mean over the `(2 * half_width + 1)`-sided square centred on `(cx, cy)`.
    ///
    /// Windows that would cross the border are translated, not shrunk, to the
    /// nearest position fully inside the image.
    pub fn windowed_mean(&self, cx: usize, cy: usize, half_width: usize) -> Result<f64> {
        if cx >= self.width || cy >= self.height {
            return Err(Error::InvalidArgument(format!(
                "window center ({cx}, {cy}) outside {}x{} image",
                self.width, self.height
            )));
        }
        let side = 2 * half_width + 1;
        if side > self.width || side > self.height {
            return Err(Error::WindowExceedsImage);
        }
        let x0 = cx.saturating_sub(half_width).min(self.width - side);
        let y0 = cy.saturating_sub(half_width).min(self.height - side);
        let sum = self.rect_sum(x0, y0, x0 + side, y0 + side);
        Ok(sum / (side * side) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(w: usize, h: usize, seed: u64) -> GrayImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GrayImage::from_fn(w, h, |_, _| rng.random::<f64>()).unwrap()
    }

    fn brute_window(img: &GrayImage, x0: usize, y0: usize, side: usize) -> f64 {
        let mut s = 0.0;
        for y in y0..y0 + side {
            for x in x0..x0 + side {
                s += img.get(x, y);
            }
        }
        s / (side * side) as f64
    }

    #[test]
    fn ones_corner_is_area() {
        let ii = IntegralImage::build(&GrayImage::filled(4, 4, 1.0).unwrap());
        assert_eq!(ii.at(4, 4), 16.0);
    }

    #[test]
    fn zeros_table_is_zero() {
        let ii = IntegralImage::build(&GrayImage::filled(5, 3, 0.0).unwrap());
        assert!(ii.table.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn every_rectangle_matches_brute_force() {
        let img = random_image(8, 8, 7);
        let ii = IntegralImage::build(&img);
        for y0 in 0..8 {
            for y1 in y0..=8 {
                for x0 in 0..8 {
                    for x1 in x0..=8 {
                        let mut s = 0.0;
                        for y in y0..y1 {
                            for x in x0..x1 {
                                s += img.get(x, y);
                            }
                        }
                        assert!((ii.rect_sum(x0, y0, x1, y1) - s).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn constant_mean_everywhere() {
        let ii = IntegralImage::build(&GrayImage::filled(9, 7, 0.375).unwrap());
        for y in 0..7 {
            for x in 0..9 {
                assert!((ii.windowed_mean(x, y, 2).unwrap() - 0.375).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn corner_window_is_translated() {
        let img = GrayImage::from_fn(10, 8, |x, y| (x + 2 * y) as f64 / 30.0).unwrap();
        let ii = IntegralImage::build(&img);
        // half width 2 -> side 5; top-left corner window is [0,5)x[0,5)
        let m = ii.windowed_mean(0, 0, 2).unwrap();
        assert!((m - brute_window(&img, 0, 0, 5)).abs() < 1e-12);
        // bottom-right corner window is [5,10)x[3,8)
        let m = ii.windowed_mean(9, 7, 2).unwrap();
        assert!((m - brute_window(&img, 5, 3, 5)).abs() < 1e-12);
    }

    #[test]
    fn whole_image_window_is_global_mean() {
        let img = random_image(7, 7, 3);
        let ii = IntegralImage::build(&img);
        let global = img.data().iter().sum::<f64>() / 49.0;
        assert!((ii.windowed_mean(3, 3, 3).unwrap() - global).abs() < 1e-12);
    }

    #[test]
    fn oversized_window_errors() {
        let ii = IntegralImage::build(&GrayImage::filled(6, 4, 0.5).unwrap());
        assert!(matches!(ii.windowed_mean(1, 1, 2), Err(Error::WindowExceedsImage)));
        assert!(ii.windowed_mean(6, 0, 0).is_err());
    }

    #[test]
    fn integral_is_linear() {
        let img = random_image(12, 9, 11);
        let a = 0.37;
        let scaled = GrayImage::from_fn(12, 9, |x, y| a * img.get(x, y)).unwrap();
        let ii = IntegralImage::build(&img);
        let jj = IntegralImage::build(&scaled);
        for (p, q) in ii.table.iter().zip(&jj.table) {
            assert!((a * p - q).abs() < 1e-9);
        }
    }

    proptest::proptest! {
        #[test]
        fn windowed_mean_matches_direct_sum(
            w in 1usize..14, h in 1usize..14, seed in 0u64..1000,
            fx in 0.0f64..1.0, fy in 0.0f64..1.0, fr in 0.0f64..1.0,
        ) {
            let img = random_image(w, h, seed);
            let ii = IntegralImage::build(&img);
            let max_hw = (w.min(h) - 1) / 2;
            let hw = (fr * (max_hw + 1) as f64) as usize % (max_hw + 1);
            let cx = ((fx * w as f64) as usize).min(w - 1);
            let cy = ((fy * h as f64) as usize).min(h - 1);
            let side = 2 * hw + 1;
            let x0 = (cx as i64 - hw as i64).clamp(0, (w - side) as i64) as usize;
            let y0 = (cy as i64 - hw as i64).clamp(0, (h - side) as i64) as usize;
            let got = ii.windowed_mean(cx, cy, hw).unwrap();
            proptest::prop_assert!((got - brute_window(&img, x0, y0, side)).abs() < 1e-9);
        }
    }
}
