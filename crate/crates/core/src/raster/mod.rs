//! Image containers, grey conversion, PNM I/O and the integral image.
//!
//! Intensities are normalised to `[0, 1]` when images are constructed or
//! decoded, so all downstream statistics are independent of bit depth.

mod integral;
mod pnm;

pub use integral::IntegralImage;
pub use pnm::{decode_pnm, encode_pgm, encode_ppm, read_pnm, write_pnm, write_ppm, Pnm};

use crate::error::{Error, Result};

/// Rec.601 luma weights.
const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// Row-major grey image with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if data.len() != width * height {
            return Err(Error::InvalidPixels(format!(
                "expected {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidPixels(format!("intensity {v} outside [0, 1]")));
        }
        Ok(Self { width, height, data })
    }

    /// Constant image.
    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image from `f(x, y)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Nearest-neighbour resampling to `width` x `height`.
    pub fn resize_nearest(&self, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        Self::from_fn(width, height, |x, y| {
            let src_x = (((x as f64 + 0.5) * sx).floor() as usize).min(self.width - 1);
            let src_y = (((y as f64 + 0.5) * sy).floor() as usize).min(self.height - 1);
            self.get(src_x, src_y)
        })
    }
}

/// Row-major colour raster. Channels are either all in `[0, 1]` or all in
/// `[0, 255]`; [`to_gray`] detects which.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 3]>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidPixels(format!(
                "expected {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        if data.iter().flatten().any(|v| !(0.0..=255.0).contains(v)) {
            return Err(Error::InvalidPixels("channel outside [0, 255]".into()));
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[[f64; 3]] {
        &self.data
    }
}

/// Converts a colour raster to grey using Rec.601 luma.
pub fn to_gray(rgb: &RgbImage) -> Result<GrayImage> {
    if rgb.width == 0 || rgb.height == 0 {
        return Err(Error::EmptyImage);
    }
    let scale = if rgb.data.iter().flatten().any(|&v| v > 1.0) {
        1.0 / 255.0
    } else {
        1.0
    };
    let data = rgb
        .data
        .iter()
        .map(|px| {
            let l: f64 = px.iter().zip(LUMA).map(|(c, w)| c * scale * w).sum();
            l.clamp(0.0, 1.0)
        })
        .collect();
    GrayImage::new(rgb.width, rgb.height, data)
}

/// Row-major boolean image; `true` marks a bright pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidPixels(format!(
                "expected {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_from_primaries() {
        let rgb = RgbImage::new(
            3,
            1,
            vec![[1.0, 1.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
        )
        .unwrap();
        let g = to_gray(&rgb).unwrap();
        assert!((g.get(0, 0) - 1.0).abs() < 1e-12);
        assert_eq!(g.get(1, 0), 0.0);
        assert!((g.get(2, 0) - 0.299).abs() < 1e-12);
    }

    #[test]
    fn gray_autodetects_byte_range() {
        let rgb = RgbImage::new(2, 1, vec![[255.0, 255.0, 255.0], [255.0, 0.0, 0.0]]).unwrap();
        let g = to_gray(&rgb).unwrap();
        assert!((g.get(0, 0) - 1.0).abs() < 1e-12);
        assert!((g.get(1, 0) - 0.299).abs() < 1e-12);
    }

    #[test]
    fn empty_rgb_is_rejected() {
        let rgb = RgbImage::new(0, 5, vec![]).unwrap();
        assert!(matches!(to_gray(&rgb), Err(Error::EmptyImage)));
    }

    #[test]
    fn gray_rejects_out_of_range() {
        assert!(GrayImage::new(1, 1, vec![1.5]).is_err());
        assert!(GrayImage::new(1, 1, vec![f64::NAN]).is_err());
        assert!(GrayImage::new(2, 1, vec![0.5]).is_err());
        assert!(matches!(GrayImage::new(0, 1, vec![]), Err(Error::EmptyImage)));
    }

    #[test]
    fn nearest_resize_doubles_pixels() {
        let img = GrayImage::new(2, 1, vec![0.0, 1.0]).unwrap();
        let big = img.resize_nearest(4, 2).unwrap();
        assert_eq!(big.data(), &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0]);
        let back = big.resize_nearest(2, 1).unwrap();
        assert_eq!(back, img);
    }
}
