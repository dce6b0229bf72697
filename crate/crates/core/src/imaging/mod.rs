//! Pixel-level primitives: raster types, quantization, color conversion,
//! resampling, convolution and codecs.
//!
//! Two raster types are used throughout. [`Image8`] is the storage form
//! (what lives on disk), [`ImageF`] is the working form every transform
//! operates on. Both are row-major interleaved RGB.

mod codec;
mod color;
mod convolve;
mod resize;

pub use codec::{decode_image, encode_png, jpeg_roundtrip, load_image, save_png};
pub use color::{hsv_to_rgb, luma, rgb_to_hsv};
pub use convolve::{convolve2d, Kernel2D};
pub use resize::{resize_area, resize_bilinear, resize_nearest, sample_bilinear};

use thiserror::Error;

pub const CHANNELS: usize = 3;

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("invalid image size {width}x{height}")]
    InvalidSize { width: usize, height: usize },
    #[error("pixel buffer has {actual} values, expected {expected}")]
    BufferLength { expected: usize, actual: usize },
    #[error("non-finite channel value at index {index}")]
    InvalidPixel { index: usize },
    #[error("kernel radius {radius} does not fit a {width}x{height} image")]
    KernelTooLarge {
        radius: usize,
        width: usize,
        height: usize,
    },
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("JPEG quality {0} outside 1..=100")]
    InvalidQuality(u8),
    #[error("codec error: {0}")]
    Codec(#[from] image::ImageError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = ImagingError> = std::result::Result<T, E>;

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(ImagingError::InvalidSize { width, height });
    }
    let expected = width * height * CHANNELS;
    if len != expected {
        return Err(ImagingError::BufferLength {
            expected,
            actual: len,
        });
    }
    Ok(())
}

/// 8-bit RGB raster.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Image8 {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Image8 {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(width * height * CHANNELS)
            .collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

/// Floating-point RGB raster with unit-range channels.
///
/// Intermediate results may leave `[0, 1]`; [`ImageF::clamped`] and
/// [`clamp_quantize`] bring them back.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageF {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl ImageF {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Result<Self> {
        Self::new(width, height, vec![value; width * height * CHANNELS])
    }

    /// Builds an image by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f32; 3],
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(ImagingError::InvalidSize { width, height });
        }
        let mut data = Vec::with_capacity(width * height * CHANNELS);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn min_dim(&self) -> usize {
        self.width.min(self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        (y * self.width + x) * CHANNELS
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[self.index(x, y) + c]
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = self.index(x, y);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [f32; 3]) {
        let i = self.index(x, y);
        self.data[i..i + CHANNELS].copy_from_slice(&rgb);
    }

    /// Applies `f` to every channel value.
    pub fn map(&self, f: impl Fn(f32) -> f32) -> ImageF {
        ImageF {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Applies `f` to every pixel.
    pub fn map_pixels(&self, f: impl Fn([f32; 3]) -> [f32; 3]) -> ImageF {
        let mut data = Vec::with_capacity(self.data.len());
        for px in self.data.chunks_exact(CHANNELS) {
            data.extend_from_slice(&f([px[0], px[1], px[2]]));
        }
        ImageF {
            width: self.width,
            height: self.height,
            data,
        }
    }

    pub fn clamped(mut self) -> ImageF {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
        self
    }

    /// Per-channel mean over all pixels.
    pub fn channel_means(&self) -> [f32; 3] {
        let mut acc = [0f64; 3];
        for px in self.data.chunks_exact(CHANNELS) {
            for c in 0..CHANNELS {
                acc[c] += px[c] as f64;
            }
        }
        let n = (self.width * self.height) as f64;
        acc.map(|s| (s / n) as f32)
    }

    /// Element-wise sum. Panics if dimensions differ.
    pub fn add(&self, other: &ImageF) -> ImageF {
        assert_eq!(self.dims(), other.dims(), "image dimensions differ");
        ImageF {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Mean squared error over all channels. Panics if dimensions differ.
    pub fn mse(&self, other: &ImageF) -> f64 {
        assert_eq!(self.dims(), other.dims(), "image dimensions differ");
        let sum: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| {
                let d = (*a - *b) as f64;
                d * d
            })
            .sum();
        sum / self.data.len() as f64
    }
}

/// Maps every channel `v` to `v / 255`.
pub fn to_unit_float(img: &Image8) -> ImageF {
    ImageF {
        width: img.width,
        height: img.height,
        data: img.data.iter().map(|&v| v as f32 / 255.0).collect(),
    }
}

/// Clamps to `[0, 1]` and quantizes with round-half-away-from-zero.
pub fn clamp_quantize(img: &ImageF) -> Result<Image8> {
    let mut data = Vec::with_capacity(img.data.len());
    for (index, &v) in img.data.iter().enumerate() {
        if !v.is_finite() {
            return Err(ImagingError::InvalidPixel { index });
        }
        data.push((v.clamp(0.0, 1.0) * 255.0).round() as u8);
    }
    Ok(Image8 {
        width: img.width,
        height: img.height,
        data,
    })
}

/// Deterministic synthetic test image: smooth gradients, a checker
/// band and a disc, so every transform has structure to act on.
pub fn test_pattern(width: usize, height: usize) -> Result<ImageF> {
    ImageF::from_fn(width, height, |x, y| {
        let u = (x as f32 + 0.5) / width as f32;
        let v = (y as f32 + 0.5) / height as f32;
        let checker = if ((x / 4) + (y / 4)) % 2 == 0 {
            0.15
        } else {
            0.0
        };
        let (du, dv) = (u - 0.6, v - 0.4);
        let disc = if du * du + dv * dv < 0.06 { 0.35 } else { 0.0 };
        [
            (0.15 + 0.6 * u + checker).min(1.0),
            (0.25 + 0.4 * v + disc).min(1.0),
            (0.7 - 0.5 * u * v + checker * 0.5).clamp(0.0, 1.0),
        ]
    })
}
