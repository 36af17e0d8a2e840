//! 8-bit grayscale rasters and pixel coordinates.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_atomic;

/// Integer pixel coordinate, `x` to the right and `y` downwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pixel {
    pub x: i32,
    pub y: i32,
}

impl Pixel {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    /// True when `other` is one of the eight neighbours of `self`.
    pub fn touches(self, other: Pixel) -> bool {
        self != other && (self.x - other.x).abs() <= 1 && (self.y - other.y).abs() <= 1
    }
}

/// Single-channel 8-bit image stored row-major. Dark ink on light paper:
/// 0 is black, 255 is blank paper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

pub const PAPER: u8 = 255;

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "{}x{} image needs {} bytes, got {}",
                width,
                height,
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn blank(width: usize, height: usize) -> Self {
        Self::filled(width, height, PAPER)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_empty(&self) -> bool {
        self.width == 0 || self.height == 0
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    /// Ink amount of a pixel, `255 - v`.
    #[inline]
    pub fn ink(&self, x: usize, y: usize) -> u8 {
        PAPER - self.get(x, y)
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn total_ink(&self) -> u64 {
        self.data.iter().map(|&v| u64::from(PAPER - v)).sum()
    }

    /// Copies rows `[y_start, y_end)`.
    pub fn crop_rows(&self, y_start: usize, y_end: usize) -> GrayImage {
        let data = self.data[y_start * self.width..y_end * self.width].to_vec();
        GrayImage {
            width: self.width,
            height: y_end - y_start,
            data,
        }
    }

    pub fn flip_vertical(&self) -> GrayImage {
        let mut data = Vec::with_capacity(self.data.len());
        for y in (0..self.height).rev() {
            data.extend_from_slice(self.row(y));
        }
        GrayImage {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// Loads a PNG or binary PGM file, converting colour input with
    /// [`crate::preproc::to_grayscale`].
    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
        let out = match img {
            DynamicImage::ImageLuma8(g) => {
                let (w, h) = g.dimensions();
                GrayImage::new(w as usize, h as usize, g.into_raw())?
            }
            other => crate::preproc::to_grayscale(&other.to_rgb8())?,
        };
        if out.is_empty() {
            return Err(Error::InvalidInput(format!(
                "{}: image has zero width or height",
                path.display()
            )));
        }
        Ok(out)
    }

    pub fn to_png_bytes(&self) -> Result<Vec<u8>> {
        let img = image::GrayImage::from_raw(self.width as u32, self.height as u32, self.data.clone())
            .ok_or_else(|| Error::InvalidInput("image buffer size mismatch".into()))?;
        let mut buf = Cursor::new(Vec::new());
        img.write_to(&mut buf, ImageFormat::Png)
            .map_err(|source| Error::Image {
                path: "<memory>".into(),
                source,
            })?;
        Ok(buf.into_inner())
    }

    /// Binary P5 encoding.
    pub fn to_pgm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_png_bytes()?)
    }

    pub fn save_pgm(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_pgm_bytes())
    }
}

/// Builds an RGB raster from raw interleaved bytes. Convenience for tests
/// and callers without the `image` types at hand.
pub fn rgb_from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<RgbImage> {
    RgbImage::from_raw(width, height, data)
        .ok_or_else(|| Error::InvalidInput("rgb buffer size mismatch".into()))
}
