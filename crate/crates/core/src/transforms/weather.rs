//! Fog, frost, snow and spatter: procedural layers blended onto the image.

use super::blur::{filter_fit, gaussian, motion_kernel, zoom_center};
use super::rng::Key;
use crate::imaging::{luma, ImageF, Result};

/// Diamond-square plasma fractal on a toroidal `size x size` grid
/// (`size` a power of two), normalized to `[0, 1]`.
///
/// Each refinement round perturbs new points by `wibble * U(-wibble, wibble)`
/// and then divides `wibble` by `decay`, so larger `decay` gives smoother maps.
pub fn plasma_fractal(size: usize, decay: f32, key: Key) -> Vec<f32> {
    assert!(size.is_power_of_two(), "plasma size must be a power of two");
    let n = size;
    let mut map = vec![0f64; n * n];
    let mut step = n;
    let mut wibble = 100f64;
    let mut round = 0u64;
    let at = |y: usize, x: usize| (y % n) * n + (x % n);
    while step >= 2 {
        let half = step / 2;
        let cells = n / step;
        let squares = key.derive(round * 2);
        let diamonds = key.derive(round * 2 + 1);
        // square step: centers of each cell from its four corners
        for i in 0..cells {
            for j in 0..cells {
                let (y, x) = (i * step, j * step);
                let sum = map[at(y, x)]
                    + map[at(y + step, x)]
                    + map[at(y, x + step)]
                    + map[at(y + step, x + step)];
                let jitter = wibble * squares.uniform_in((i * cells + j) as u64, -wibble, wibble);
                map[at(y + half, x + half)] = sum / 4.0 + jitter;
            }
        }
        // diamond step: edge midpoints from the two adjacent corners and centers
        for i in 0..cells {
            for j in 0..cells {
                let (y, x) = (i * step, j * step);
                let top = map[at(y + half, x + half)]
                    + map[at(y + n - half, x + half)]
                    + map[at(y, x)]
                    + map[at(y, x + step)];
                let idx = ((i * cells + j) * 2) as u64;
                map[at(y, x + half)] =
                    top / 4.0 + wibble * diamonds.uniform_in(idx, -wibble, wibble);
                let left = map[at(y + half, x + half)]
                    + map[at(y + half, x + n - half)]
                    + map[at(y, x)]
                    + map[at(y + step, x)];
                map[at(y + half, x)] =
                    left / 4.0 + wibble * diamonds.uniform_in(idx + 1, -wibble, wibble);
            }
        }
        step /= 2;
        wibble /= decay as f64;
        round += 1;
    }
    let lo = map.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = map.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    map.iter().map(|v| ((v - lo) / span) as f32).collect()
}

/// Plasma map covering a `w x h` image (top-left crop of the smallest
/// enclosing power-of-two grid).
fn plasma_for(w: usize, h: usize, decay: f32, key: Key) -> Vec<f32> {
    let size = w.max(h).next_power_of_two().max(2);
    let full = plasma_fractal(size, decay, key);
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        out.extend_from_slice(&full[y * size..y * size + w]);
    }
    out
}

fn gray_image(w: usize, h: usize, values: &[f32]) -> ImageF {
    ImageF::from_fn(w, h, |x, y| [values[y * w + x]; 3]).expect("non-empty layer")
}

fn first_channel(img: &ImageF) -> Vec<f32> {
    img.data().iter().step_by(3).copied().collect()
}

pub(super) fn fog(img: &ImageF, magnitude: f32, decay: f32, key: Key) -> ImageF {
    let (w, h) = img.dims();
    let plasma = plasma_for(w, h, decay, key);
    let max = img.data().iter().cloned().fold(0f32, f32::max);
    let scale = max / (max + magnitude);
    let mut out = img.clone();
    for (i, px) in out.data_mut().chunks_exact_mut(3).enumerate() {
        for v in px {
            *v = (*v + magnitude * plasma[i]) * scale;
        }
    }
    out
}

/// Procedural frost: thin bright ridges of a smooth plasma over a grainy
/// plasma, tinted icy blue.
pub(super) fn frost(img: &ImageF, image_weight: f32, frost_weight: f32, key: Key) -> ImageF {
    const TINT: [f32; 3] = [0.80, 0.88, 1.0];
    let (w, h) = img.dims();
    let grain = plasma_for(w, h, 1.5, key.derive(0));
    let veins = plasma_for(w, h, 2.5, key.derive(1));
    let mut out = img.clone();
    for (i, px) in out.data_mut().chunks_exact_mut(3).enumerate() {
        let ridge = 1.0 - (2.0 * veins[i] - 1.0).abs();
        let crystal = (0.7 * ridge.powi(4) + 0.5 * grain[i]).min(1.0);
        for (c, v) in px.iter_mut().enumerate() {
            *v = image_weight * *v + frost_weight * TINT[c] * crystal;
        }
    }
    out
}

pub(super) struct SnowParams {
    pub loc: f32,
    pub scale: f32,
    pub zoom: f32,
    pub threshold: f32,
    pub blur_radius: usize,
    pub blur_sigma: f32,
    pub blend: f32,
}

/// Falling-snow layer: thresholded Gaussian flakes, zoomed, streaked by a
/// downward motion blur, added twice (once rotated by 180 degrees) over a
/// brightened image.
pub(super) fn snow(img: &ImageF, p: &SnowParams, key: Key) -> Result<ImageF> {
    let (w, h) = img.dims();
    let flakes_key = key.derive(0);
    let flakes: Vec<f32> = (0..w * h)
        .map(|i| p.loc + p.scale * flakes_key.normal(i as u64) as f32)
        .collect();
    let zoomed = zoom_center(&gray_image(w, h, &flakes), p.zoom.max(1.0));
    let layer = zoomed.map(|v| {
        if v < p.threshold {
            0.0
        } else {
            v.clamp(0.0, 1.0)
        }
    });
    let angle = key.derive(1).uniform_in(0, -135.0, -45.0);
    let layer = first_channel(&filter_fit(
        &layer,
        motion_kernel(p.blur_radius, p.blur_sigma, angle),
    )?);
    let n = w * h;
    let mut out = img.clone();
    for (i, px) in out.data_mut().chunks_exact_mut(3).enumerate() {
        let lifted = luma([px[0], px[1], px[2]]) * 1.5 + 0.5;
        let snow = layer[i] + layer[n - 1 - i];
        for v in px {
            let base = p.blend * *v + (1.0 - p.blend) * v.max(lifted);
            *v = base + snow;
        }
    }
    Ok(out)
}

pub(super) struct SpatterParams {
    pub loc: f32,
    pub scale: f32,
    pub sigma: f32,
    pub threshold: f32,
    pub intensity: f32,
    pub mud: bool,
}

/// Liquid splashes from a thresholded, smoothed Gaussian field. Water adds
/// a pale turquoise sheen; mud occludes with brown.
pub(super) fn spatter(img: &ImageF, p: &SpatterParams, key: Key) -> Result<ImageF> {
    const WATER: [f32; 3] = [238.0 / 255.0, 238.0 / 255.0, 175.0 / 255.0];
    const MUD: [f32; 3] = [20.0 / 255.0, 42.0 / 255.0, 63.0 / 255.0];
    let (w, h) = img.dims();
    let field: Vec<f32> = (0..w * h)
        .map(|i| p.loc + p.scale * key.normal(i as u64) as f32)
        .collect();
    let liquid: Vec<f32> = first_channel(&gaussian(&gray_image(w, h, &field), p.sigma)?)
        .into_iter()
        .map(|v| if v < p.threshold { 0.0 } else { v })
        .collect();
    let mut out = img.clone();
    if !p.mud {
        let peak = liquid.iter().cloned().fold(0f32, f32::max);
        if peak <= 0.0 {
            return Ok(out);
        }
        for (i, px) in out.data_mut().chunks_exact_mut(3).enumerate() {
            let m = liquid[i] / peak * p.intensity;
            for (c, v) in px.iter_mut().enumerate() {
                *v += m * WATER[c];
            }
        }
    } else {
        let mask: Vec<f32> = liquid
            .iter()
            .map(|&v| if v > 0.0 { 1.0 } else { 0.0 })
            .collect();
        let soft = first_channel(&gaussian(&gray_image(w, h, &mask), p.intensity)?);
        for (i, px) in out.data_mut().chunks_exact_mut(3).enumerate() {
            let m = if soft[i] < 0.8 { 0.0 } else { soft[i] };
            for (c, v) in px.iter_mut().enumerate() {
                *v = *v * (1.0 - m) + MUD[c] * m;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plasma_is_normalized_and_seeded() {
        let a = plasma_fractal(32, 3.0, Key::new(1));
        assert_eq!(a.len(), 32 * 32);
        let lo = a.iter().cloned().fold(f32::MAX, f32::min);
        let hi = a.iter().cloned().fold(f32::MIN, f32::max);
        assert_eq!((lo, hi), (0.0, 1.0));
        assert_eq!(a, plasma_fractal(32, 3.0, Key::new(1)));
        assert_ne!(a, plasma_fractal(32, 3.0, Key::new(2)));
    }

    #[test]
    fn higher_decay_is_smoother() {
        // mean absolute neighbour difference drops as fine octaves shrink
        let roughness = |decay: f32| {
            let m = plasma_fractal(64, decay, Key::new(7));
            let mut acc = 0.0;
            for y in 0..64 {
                for x in 0..63 {
                    acc += (m[y * 64 + x] - m[y * 64 + x + 1]).abs();
                }
            }
            acc
        };
        assert!(roughness(3.0) < roughness(1.5));
    }

    #[test]
    fn fog_stays_below_original_peak() {
        let img = ImageF::from_fn(16, 16, |x, _| [x as f32 / 20.0; 3]).unwrap();
        let peak = 15.0 / 20.0;
        let out = fog(&img, 1.0, 2.0, Key::new(3));
        assert!(out.data().iter().all(|&v| (0.0..=peak + 1e-6).contains(&v)));
        assert_ne!(out, img);
    }
}
