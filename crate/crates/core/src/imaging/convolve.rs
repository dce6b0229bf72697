use super::{ImageF, ImagingError, Result, CHANNELS};

/// Square filter kernel of side `2 * radius + 1`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel2D {
    radius: usize,
    weights: Vec<f32>,
}

impl Kernel2D {
    pub fn new(radius: usize, weights: Vec<f32>) -> Result<Self> {
        let side = 2 * radius + 1;
        if weights.len() != side * side {
            return Err(ImagingError::InvalidKernel(format!(
                "{} weights for radius {radius}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(ImagingError::InvalidKernel("non-finite weight".into()));
        }
        Ok(Self { radius, weights })
    }

    pub fn identity() -> Self {
        Self {
            radius: 0,
            weights: vec![1.0],
        }
    }

    pub fn box_blur(radius: usize) -> Self {
        let side = 2 * radius + 1;
        let n = side * side;
        Self {
            radius,
            weights: vec![1.0 / n as f32; n],
        }
    }

    /// Normalized isotropic Gaussian truncated at `radius`.
    pub fn gaussian(sigma: f32, radius: usize) -> Self {
        if sigma <= 0.0 {
            return Self::identity();
        }
        let r = radius as i64;
        let mut weights = Vec::with_capacity((2 * radius + 1).pow(2));
        for dy in -r..=r {
            for dx in -r..=r {
                let d2 = (dx * dx + dy * dy) as f64;
                weights.push((-d2 / (2.0 * (sigma as f64).powi(2))).exp() as f32);
            }
        }
        Self { radius, weights }.normalized()
    }

    /// Gaussian with the radius chosen as `ceil(4 sigma)`, at least 1.
    pub fn gaussian_auto(sigma: f32) -> Self {
        let radius = ((4.0 * sigma).ceil() as usize).max(1);
        Self::gaussian(sigma, radius)
    }

    /// Aliased disk: all taps with `dx^2 + dy^2 <= radius^2`, normalized.
    pub fn disk(radius: f32) -> Self {
        let r = (radius.ceil() as usize).max(1);
        let ri = r as i64;
        let r2 = radius * radius;
        let mut weights = Vec::with_capacity((2 * r + 1).pow(2));
        for dy in -ri..=ri {
            for dx in -ri..=ri {
                let inside = ((dx * dx + dy * dy) as f32) <= r2;
                weights.push(if inside { 1.0 } else { 0.0 });
            }
        }
        Self { radius: r, weights }.normalized()
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    /// Weight at offset `(dx, dy)` from the center.
    pub fn at(&self, dx: isize, dy: isize) -> f32 {
        let r = self.radius as isize;
        self.weights[((dy + r) as usize) * self.side() + (dx + r) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().map(|&w| w as f64).sum()
    }

    /// Scales weights to sum to one. A zero-sum kernel is returned unchanged.
    pub fn normalized(mut self) -> Self {
        let s = self.sum();
        if s != 0.0 {
            for w in &mut self.weights {
                *w = (*w as f64 / s) as f32;
            }
        }
        self
    }

    /// Shrinks the kernel to `radius`, discarding outer taps and
    /// renormalizing. No-op if already within bounds.
    pub fn truncated(self, radius: usize) -> Self {
        if radius >= self.radius {
            return self;
        }
        let cut = self.radius - radius;
        let side = self.side();
        let new_side = 2 * radius + 1;
        let mut weights = Vec::with_capacity(new_side * new_side);
        for y in cut..cut + new_side {
            weights.extend_from_slice(&self.weights[y * side + cut..y * side + cut + new_side]);
        }
        let k = Self { radius, weights };
        if k.sum() > 0.0 {
            k.normalized()
        } else {
            Self::identity()
        }
    }
}

/// Mirror-without-repeat: -1 maps to 1, n maps to n - 2.
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let j = if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    };
    j as usize
}

/// Filters `img` with `k` using reflect padding.
///
/// The kernel is applied as a correlation: output `(x, y)` is
/// `sum k(dx, dy) * img(x + dx, y + dy)`.
pub fn convolve2d(img: &ImageF, k: &Kernel2D) -> Result<ImageF> {
    let (w, h) = img.dims();
    let r = k.radius();
    if r >= w.min(h) {
        return Err(ImagingError::KernelTooLarge {
            radius: r,
            width: w,
            height: h,
        });
    }
    let ri = r as isize;
    let side = k.side();
    let src = img.data();
    let mut out = vec![0f32; src.len()];
    let col_idx: Vec<Vec<usize>> = (0..w)
        .map(|x| (-ri..=ri).map(|dx| reflect(x as isize + dx, w)).collect())
        .collect();
    for y in 0..h {
        for ky in 0..side {
            let sy = reflect(y as isize + ky as isize - ri, h);
            let row = &src[sy * w * CHANNELS..(sy + 1) * w * CHANNELS];
            let kw = &k.weights[ky * side..(ky + 1) * side];
            for (x, cols) in col_idx.iter().enumerate() {
                let o = (y * w + x) * CHANNELS;
                let mut acc = [0f32; 3];
                for (kx, &sx) in cols.iter().enumerate() {
                    let wt = kw[kx];
                    if wt == 0.0 {
                        continue;
                    }
                    let p = sx * CHANNELS;
                    acc[0] += wt * row[p];
                    acc[1] += wt * row[p + 1];
                    acc[2] += wt * row[p + 2];
                }
                out[o] += acc[0];
                out[o + 1] += acc[1];
                out[o + 2] += acc[2];
            }
        }
    }
    ImageF::new(w, h, out)
}
