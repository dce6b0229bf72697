use super::rng::Key;
use crate::imaging::{hsv_to_rgb, luma, rgb_to_hsv, sample_bilinear, ImageF};

/// Clockwise quarter turn: pixel at row `r`, column `c` moves to row `c`,
/// column `H - 1 - r`. Width and height swap.
pub fn rot90(img: &ImageF) -> ImageF {
    let (w, h) = img.dims();
    ImageF::from_fn(h, w, |x, y| img.pixel(y, h - 1 - x)).expect("non-empty image")
}

/// Inverse of [`rot90`].
pub fn rot270(img: &ImageF) -> ImageF {
    let (w, h) = img.dims();
    ImageF::from_fn(h, w, |x, y| img.pixel(w - 1 - y, x)).expect("non-empty image")
}

/// Mirrors columns.
pub fn hflip(img: &ImageF) -> ImageF {
    let (w, h) = img.dims();
    ImageF::from_fn(w, h, |x, y| img.pixel(w - 1 - x, y)).expect("non-empty image")
}

pub const CROP_AREA_MIN: f64 = 0.75;
pub const CROP_AREA_MAX: f64 = 0.80;

/// Continuous crop rectangle in pixel-edge coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CropWindow {
    pub x0: f64,
    pub y0: f64,
    pub width: f64,
    pub height: f64,
    /// Fraction of the source area kept.
    pub area_fraction: f64,
}

/// Samples the crop for `crop_resize`: area fraction uniform in
/// `[0.75, 0.80]`, aspect ratio preserved, top-left offset uniform over
/// valid placements.
pub fn crop_window(width: usize, height: usize, seed: u64) -> CropWindow {
    let key = Key::new(seed).derive(0xC209);
    let area_fraction = key.uniform_in(0, CROP_AREA_MIN, CROP_AREA_MAX);
    let side = area_fraction.sqrt();
    let (cw, ch) = (width as f64 * side, height as f64 * side);
    CropWindow {
        x0: key.uniform(1) * (width as f64 - cw),
        y0: key.uniform(2) * (height as f64 - ch),
        width: cw,
        height: ch,
        area_fraction,
    }
}

/// Crops the [`crop_window`] and resizes it back to the input size with
/// half-pixel-center bilinear sampling.
pub fn crop_resize(img: &ImageF, seed: u64) -> ImageF {
    let (w, h) = img.dims();
    let win = crop_window(w, h, seed);
    let sx = win.width / w as f64;
    let sy = win.height / h as f64;
    ImageF::from_fn(w, h, |x, y| {
        let src_x = win.x0 + (x as f64 + 0.5) * sx - 0.5;
        let src_y = win.y0 + (y as f64 + 0.5) * sy - 0.5;
        sample_bilinear(img, src_x as f32, src_y as f32)
    })
    .expect("non-empty image")
    .clamped()
}

pub const JITTER_STRENGTH: f64 = 0.5;

/// Sampled color-jitter factors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JitterFactors {
    pub brightness: f32,
    pub contrast: f32,
    pub saturation: f32,
    /// Hue rotation in cycles.
    pub hue: f32,
}

pub fn jitter_factors(seed: u64) -> JitterFactors {
    let key = Key::new(seed).derive(0xC0104);
    let factor = |i| key.uniform_in(i, 1.0 - JITTER_STRENGTH, 1.0 + JITTER_STRENGTH) as f32;
    JitterFactors {
        brightness: factor(0),
        contrast: factor(1),
        saturation: factor(2),
        hue: key.uniform_in(3, -JITTER_STRENGTH, JITTER_STRENGTH) as f32,
    }
}

/// Applies jitter in the fixed order brightness, contrast, saturation, hue,
/// clamping to `[0, 1]` after each step.
pub fn color_jitter_with(img: &ImageF, f: JitterFactors) -> ImageF {
    let clamp3 = |p: [f32; 3]| p.map(|v| v.clamp(0.0, 1.0));
    let x = img.map_pixels(|p| clamp3(p.map(|v| v * f.brightness)));
    let mean = {
        let sum: f64 = x
            .data()
            .chunks_exact(3)
            .map(|p| luma([p[0], p[1], p[2]]) as f64)
            .sum();
        (sum / (x.width() * x.height()) as f64) as f32
    };
    let x = x.map_pixels(|p| clamp3(p.map(|v| f.contrast * v + (1.0 - f.contrast) * mean)));
    let x = x.map_pixels(|p| {
        let g = luma(p);
        clamp3(p.map(|v| f.saturation * v + (1.0 - f.saturation) * g))
    });
    x.map_pixels(|p| {
        let [h, s, v] = rgb_to_hsv(p);
        clamp3(hsv_to_rgb([h + f.hue, s, v]))
    })
}

pub fn color_jitter(img: &ImageF, seed: u64) -> ImageF {
    color_jitter_with(img, jitter_factors(seed))
}
