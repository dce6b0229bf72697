use rand_distr::{Distribution, Poisson};

use super::rng::Key;
use crate::imaging::ImageF;

pub(super) fn gaussian(img: &ImageF, sigma: f32, key: Key) -> ImageF {
    let mut out = img.clone();
    for (i, v) in out.data_mut().iter_mut().enumerate() {
        *v += sigma * key.normal(i as u64) as f32;
    }
    out
}

/// Photon-count noise: `Poisson(x * photons) / photons` per channel.
pub(super) fn shot(img: &ImageF, photons: f32, key: Key) -> ImageF {
    let mut out = img.clone();
    for (i, v) in out.data_mut().iter_mut().enumerate() {
        let lambda = (v.clamp(0.0, 1.0) * photons) as f64;
        *v = if lambda > 0.0 {
            let mut rng = key.stream(i as u64);
            let count: f64 = Poisson::new(lambda)
                .expect("positive finite rate")
                .sample(&mut rng);
            (count / photons as f64) as f32
        } else {
            0.0
        };
    }
    out
}

/// Salt-and-pepper: each channel value is replaced with probability
/// `amount`, by 0 or 1 with equal odds.
pub(super) fn impulse(img: &ImageF, amount: f32, key: Key) -> ImageF {
    let hit = key.derive(0);
    let salt = key.derive(1);
    let mut out = img.clone();
    for (i, v) in out.data_mut().iter_mut().enumerate() {
        if hit.uniform(i as u64) < amount as f64 {
            *v = if salt.uniform(i as u64) < 0.5 {
                0.0
            } else {
                1.0
            };
        }
    }
    out
}

/// Multiplicative noise: `x + x * N(0, sigma^2)`.
pub(super) fn speckle(img: &ImageF, sigma: f32, key: Key) -> ImageF {
    let mut out = img.clone();
    for (i, v) in out.data_mut().iter_mut().enumerate() {
        *v += *v * sigma * key.normal(i as u64) as f32;
    }
    out
}
