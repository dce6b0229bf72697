use super::rng::Key;
use crate::imaging::{convolve2d, sample_bilinear, ImageF, Kernel2D, Result};

/// Convolves with `k`, first shrinking it to fit the image if needed.
pub(super) fn filter_fit(img: &ImageF, k: Kernel2D) -> Result<ImageF> {
    let max_radius = img.min_dim().saturating_sub(1);
    convolve2d(img, &k.truncated(max_radius))
}

pub(super) fn gaussian(img: &ImageF, sigma: f32) -> Result<ImageF> {
    filter_fit(img, Kernel2D::gaussian_auto(sigma))
}

/// Gaussian blur, then local pixel shuffling, then Gaussian blur again.
pub(super) fn glass(
    img: &ImageF,
    sigma: f32,
    max_delta: usize,
    iterations: usize,
    key: Key,
) -> Result<ImageF> {
    let mut x = gaussian(img, sigma)?;
    let (w, h) = x.dims();
    let d = max_delta as i64;
    for it in 0..iterations {
        let k = key.derive(it as u64);
        // sweep bottom-right to top-left; swaps apply in sweep order, draws
        // are addressed by position
        for yy in (d + 1..=h as i64 - d).rev() {
            for xx in (d + 1..=w as i64 - d).rev() {
                let (yi, xi) = (yy as usize, xx as usize);
                let ctr = ((yi * w + xi) as u64) * 2;
                let dx = k.int_in(ctr, -d, d);
                let dy = k.int_in(ctr + 1, -d, d);
                let (sx, sy) = ((xi as i64 + dx) as usize, (yi as i64 + dy) as usize);
                let a = x.pixel(xi, yi);
                let b = x.pixel(sx, sy);
                x.set_pixel(xi, yi, b);
                x.set_pixel(sx, sy, a);
            }
        }
    }
    gaussian(&x, sigma)
}

/// Disk kernel smoothed by a small Gaussian to soften aliasing.
pub(super) fn defocus(img: &ImageF, radius: f32, alias_sigma: f32) -> Result<ImageF> {
    let x = filter_fit(img, Kernel2D::disk(radius))?;
    gaussian(&x, alias_sigma)
}

/// One-sided line kernel of `radius` taps along `angle_deg`, weighted by a
/// Gaussian in the distance from the origin tap.
pub(super) fn motion_kernel(radius: usize, sigma: f32, angle_deg: f64) -> Kernel2D {
    let radius = radius.max(1);
    let side = 2 * radius + 1;
    let mut weights = vec![0f32; side * side];
    let (s, c) = angle_deg.to_radians().sin_cos();
    for i in 0..=radius {
        let t = i as f64;
        let w = (-(t * t) / (2.0 * (sigma as f64).powi(2))).exp();
        let x = (radius as f64 + t * c).round() as usize;
        let y = (radius as f64 - t * s).round() as usize;
        weights[y * side + x] += w as f32;
    }
    Kernel2D::new(radius, weights)
        .expect("finite weights")
        .normalized()
}

pub(super) fn motion(img: &ImageF, radius: usize, sigma: f32, key: Key) -> Result<ImageF> {
    let angle = key.uniform_in(0, -45.0, 45.0);
    filter_fit(img, motion_kernel(radius, sigma, angle))
}

/// Center zoom by `factor >= 1`, cropping back to the original size.
pub(super) fn zoom_center(img: &ImageF, factor: f32) -> ImageF {
    let (w, h) = img.dims();
    let (cx, cy) = (w as f32 / 2.0, h as f32 / 2.0);
    ImageF::from_fn(w, h, |x, y| {
        let sx = cx + (x as f32 + 0.5 - cx) / factor - 0.5;
        let sy = cy + (y as f32 + 0.5 - cy) / factor - 0.5;
        sample_bilinear(img, sx, sy)
    })
    .expect("non-empty image")
}

/// Mean of the original and center zooms `1, 1 + step, ..., max_zoom`.
pub(super) fn zoom(img: &ImageF, max_zoom: f32, step: f32) -> ImageF {
    let n = ((max_zoom - 1.0) / step).round() as usize;
    let mut acc: Vec<f32> = img.data().to_vec();
    for i in 0..=n {
        let z = zoom_center(img, 1.0 + i as f32 * step);
        for (a, v) in acc.iter_mut().zip(z.data()) {
            *a += v;
        }
    }
    let denom = (n + 2) as f32;
    for a in &mut acc {
        *a /= denom;
    }
    ImageF::new(img.width(), img.height(), acc).expect("same dimensions")
}
