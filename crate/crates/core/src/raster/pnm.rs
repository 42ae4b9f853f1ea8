//! Binary PGM (`P5`) and PPM (`P6`) codecs.
//!
//! Header: magic, width, height and maxval separated by whitespace, `#`
//! comments allowed up to the end of a line, then exactly one whitespace byte
//! before the big-endian samples. Samples are one byte when `maxval < 256`,
//! two bytes otherwise.

use std::path::Path;

use super::{GrayImage, RgbImage};
use crate::error::{Error, Result};

/// A decoded PNM raster, normalised to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Pnm {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl Pnm {
    /// Grey view of the raster, converting colour with Rec.601 luma.
    pub fn into_gray(self) -> Result<GrayImage> {
        match self {
            Pnm::Gray(g) => Ok(g),
            Pnm::Rgb(rgb) => super::to_gray(&rgb),
        }
    }
}

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Pnm { offset, message: message.into() }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    /// Returns the parsed value and the offset it started at.
    fn number(&mut self, what: &str) -> Result<(usize, usize)> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(parse_err(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .map(|v| (v, start))
            .ok_or_else(|| parse_err(start, format!("{what} out of range")))
    }
}

/// Decodes a P5 or P6 byte stream.
pub fn decode_pnm(bytes: &[u8]) -> Result<Pnm> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(parse_err(0, "missing magic number"));
    }
    let channels = match bytes[1] {
        b'5' => 1,
        b'6' => 3,
        _ => return Err(parse_err(1, "unsupported magic, expected P5 or P6")),
    };
    let mut hdr = Header { bytes, pos: 2 };
    if hdr.pos < bytes.len() && !bytes[hdr.pos].is_ascii_whitespace() && bytes[hdr.pos] != b'#' {
        return Err(parse_err(2, "expected whitespace after magic"));
    }
    let (width, width_at) = hdr.number("width")?;
    let (height, height_at) = hdr.number("height")?;
    if width == 0 || height == 0 {
        return Err(parse_err(if width == 0 { width_at } else { height_at }, "zero image dimension"));
    }
    let (maxval, maxval_at) = hdr.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(parse_err(maxval_at, format!("maxval {maxval} not in 1..=65535")));
    }
    match bytes.get(hdr.pos) {
        Some(b) if b.is_ascii_whitespace() => hdr.pos += 1,
        _ => return Err(parse_err(hdr.pos, "expected single whitespace before raster")),
    }

    let bytes_per_sample = if maxval < 256 { 1 } else { 2 };
    let n = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(channels))
        .ok_or_else(|| parse_err(width_at, "image too large"))?;
    let body = &bytes[hdr.pos..];
    let need = n * bytes_per_sample;
    if body.len() < need {
        return Err(parse_err(bytes.len(), format!("truncated raster: need {need} bytes, have {}", body.len())));
    }

    let maxval_f = maxval as f64;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let v = if bytes_per_sample == 1 {
            body[i] as usize
        } else {
            u16::from_be_bytes([body[2 * i], body[2 * i + 1]]) as usize
        };
        if v > maxval {
            return Err(parse_err(hdr.pos + i * bytes_per_sample, format!("sample {v} exceeds maxval {maxval}")));
        }
        samples.push(v as f64 / maxval_f);
    }

    if channels == 1 {
        Ok(Pnm::Gray(GrayImage::new(width, height, samples)?))
    } else {
        let data = samples.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Ok(Pnm::Rgb(RgbImage::new(width, height, data)?))
    }
}

pub fn read_pnm(path: impl AsRef<Path>) -> Result<Pnm> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
    decode_pnm(&bytes)
}

#[inline]
fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Encodes an 8-bit P5 stream.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().map(|&v| to_byte(v)));
    out
}

/// Encodes an 8-bit P6 stream. Channels in `[0, 255]` are scaled down first.
pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let scale = if img.data().iter().flatten().any(|&v| v > 1.0) { 1.0 / 255.0 } else { 1.0 };
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().flatten().map(|&v| to_byte(v * scale)));
    out
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io { path: path.to_owned(), source })
}

pub fn write_pnm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_pgm(img))
}

pub fn write_ppm(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_ppm(img))
}
