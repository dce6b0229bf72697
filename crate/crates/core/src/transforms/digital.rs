use super::blur::gaussian;
use super::rng::Key;
use crate::imaging::{
    hsv_to_rgb, jpeg_roundtrip, resize_area, resize_nearest, rgb_to_hsv, sample_bilinear, ImageF,
    Result,
};

/// Adds `delta` to the HSV value channel.
pub(super) fn brightness(img: &ImageF, delta: f32) -> ImageF {
    img.map_pixels(|px| {
        let [h, s, v] = rgb_to_hsv(px);
        hsv_to_rgb([h, s, (v + delta).clamp(0.0, 1.0)])
    })
}

/// `(x - mean) * factor + mean`, with per-channel means.
pub(super) fn contrast(img: &ImageF, factor: f32) -> ImageF {
    let means = img.channel_means();
    img.map_pixels(|px| {
        let mut out = px;
        for c in 0..3 {
            out[c] = (px[c] - means[c]) * factor + means[c];
        }
        out
    })
}

/// Scales HSV saturation by `factor` and adds `offset`.
pub(super) fn saturate(img: &ImageF, factor: f32, offset: f32) -> ImageF {
    img.map_pixels(|px| {
        let [h, s, v] = rgb_to_hsv(px);
        hsv_to_rgb([h, (s * factor + offset).clamp(0.0, 1.0), v])
    })
}

/// Resamples along a smooth random displacement field. The field is white
/// noise smoothed by a Gaussian of `smoothing * side` pixels, rescaled to an
/// RMS displacement of `magnitude * side` pixels.
pub(super) fn elastic(img: &ImageF, magnitude: f32, smoothing: f32, key: Key) -> Result<ImageF> {
    let (w, h) = img.dims();
    let side = img.min_dim() as f32;
    let raw = ImageF::from_fn(w, h, |x, y| {
        let i = (y * w + x) as u64;
        [
            key.derive(0).uniform_in(i, -1.0, 1.0) as f32,
            key.derive(1).uniform_in(i, -1.0, 1.0) as f32,
            0.0,
        ]
    })?;
    let field = gaussian(&raw, smoothing * side)?;
    let rms = {
        let sum: f64 = field
            .data()
            .chunks_exact(3)
            .map(|p| (p[0] as f64).powi(2) + (p[1] as f64).powi(2))
            .sum();
        (sum / (w * h) as f64).sqrt() as f32
    };
    let gain = if rms > 0.0 {
        magnitude * side / rms
    } else {
        0.0
    };
    ImageF::from_fn(w, h, |x, y| {
        let d = field.pixel(x, y);
        sample_bilinear(img, x as f32 + gain * d[0], y as f32 + gain * d[1])
    })
}

/// Area downscale by `scale`, then nearest-neighbour upscale.
pub(super) fn pixelate(img: &ImageF, scale: f32) -> Result<ImageF> {
    let (w, h) = img.dims();
    let sw = ((w as f32 * scale) as usize).max(1);
    let sh = ((h as f32 * scale) as usize).max(1);
    let small = resize_area(img, sw, sh)?;
    resize_nearest(&small, w, h)
}

pub(super) fn jpeg(img: &ImageF, quality: u8) -> Result<ImageF> {
    jpeg_roundtrip(img, quality)
}
