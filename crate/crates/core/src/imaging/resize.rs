use super::{ImageF, ImagingError, Result, CHANNELS};

fn check_out(out_w: usize, out_h: usize) -> Result<()> {
    if out_w == 0 || out_h == 0 {
        return Err(ImagingError::InvalidSize {
            width: out_w,
            height: out_h,
        });
    }
    Ok(())
}

/// Bilinear sample at continuous source coordinates, where integer
/// coordinates are pixel centers. Coordinates are clamped to the image.
#[inline]
pub fn sample_bilinear(img: &ImageF, x: f32, y: f32) -> [f32; 3] {
    let (w, h) = img.dims();
    let x = x.clamp(0.0, (w - 1) as f32);
    let y = y.clamp(0.0, (h - 1) as f32);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let tx = x - x0 as f32;
    let ty = y - y0 as f32;
    let a = img.pixel(x0, y0);
    let b = img.pixel(x1, y0);
    let c = img.pixel(x0, y1);
    let d = img.pixel(x1, y1);
    let mut out = [0.0; 3];
    for i in 0..CHANNELS {
        let top = a[i] + (b[i] - a[i]) * tx;
        let bottom = c[i] + (d[i] - c[i]) * tx;
        out[i] = top + (bottom - top) * ty;
    }
    out
}

/// Bilinear resize with half-pixel-center alignment.
pub fn resize_bilinear(img: &ImageF, out_w: usize, out_h: usize) -> Result<ImageF> {
    check_out(out_w, out_h)?;
    let sx = img.width() as f32 / out_w as f32;
    let sy = img.height() as f32 / out_h as f32;
    ImageF::from_fn(out_w, out_h, |x, y| {
        let src_x = (x as f32 + 0.5) * sx - 0.5;
        let src_y = (y as f32 + 0.5) * sy - 0.5;
        sample_bilinear(img, src_x, src_y)
    })
}

/// Nearest-neighbour resize, sampling the source pixel whose area
/// contains each output pixel center.
pub fn resize_nearest(img: &ImageF, out_w: usize, out_h: usize) -> Result<ImageF> {
    check_out(out_w, out_h)?;
    let (w, h) = img.dims();
    ImageF::from_fn(out_w, out_h, |x, y| {
        let sx = (((x as f64 + 0.5) * w as f64 / out_w as f64) as usize).min(w - 1);
        let sy = (((y as f64 + 0.5) * h as f64 / out_h as f64) as usize).min(h - 1);
        img.pixel(sx, sy)
    })
}

/// Per-output-index list of `(source index, weight)` for an area filter.
fn area_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f32)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|o| {
            let start = o as f64 * scale;
            let end = (o + 1) as f64 * scale;
            let mut taps = Vec::new();
            let mut i = start.floor() as usize;
            while (i as f64) < end && i < src {
                let lo = start.max(i as f64);
                let hi = end.min((i + 1) as f64);
                if hi > lo {
                    taps.push((i, ((hi - lo) / scale) as f32));
                }
                i += 1;
            }
            taps
        })
        .collect()
}

/// Box-filter (area-averaging) resize. Exact pixel averaging for integer
/// downscale factors; fractional coverage otherwise.
pub fn resize_area(img: &ImageF, out_w: usize, out_h: usize) -> Result<ImageF> {
    check_out(out_w, out_h)?;
    let (w, h) = img.dims();
    let wx = area_weights(w, out_w);
    let wy = area_weights(h, out_h);
    // horizontal pass: h rows x out_w columns
    let mut tmp = vec![0f32; h * out_w * CHANNELS];
    for y in 0..h {
        for (ox, taps) in wx.iter().enumerate() {
            let mut acc = [0f32; 3];
            for &(sx, wt) in taps {
                let p = img.pixel(sx, y);
                for c in 0..CHANNELS {
                    acc[c] += p[c] * wt;
                }
            }
            let i = (y * out_w + ox) * CHANNELS;
            tmp[i..i + CHANNELS].copy_from_slice(&acc);
        }
    }
    ImageF::from_fn(out_w, out_h, |ox, oy| {
        let mut acc = [0f32; 3];
        for &(sy, wt) in &wy[oy] {
            let i = (sy * out_w + ox) * CHANNELS;
            for c in 0..CHANNELS {
                acc[c] += tmp[i + c] * wt;
            }
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::test_pattern;

    /// Independent scalar bilinear reference, one channel at a time.
    fn reference_bilinear(src: &[f32], w: usize, h: usize, ow: usize, oh: usize) -> Vec<f32> {
        let at = |x: i64, y: i64| {
            let x = x.clamp(0, w as i64 - 1) as usize;
            let y = y.clamp(0, h as i64 - 1) as usize;
            src[y * w + x] as f64
        };
        let mut out = Vec::new();
        for oy in 0..oh {
            for ox in 0..ow {
                let fx = ((ox as f64 + 0.5) * w as f64 / ow as f64 - 0.5).max(0.0);
                let fy = ((oy as f64 + 0.5) * h as f64 / oh as f64 - 0.5).max(0.0);
                let (x0, y0) = (fx.floor() as i64, fy.floor() as i64);
                let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
                let v = at(x0, y0) * (1.0 - tx) * (1.0 - ty)
                    + at(x0 + 1, y0) * tx * (1.0 - ty)
                    + at(x0, y0 + 1) * (1.0 - tx) * ty
                    + at(x0 + 1, y0 + 1) * tx * ty;
                out.push(v as f32);
            }
        }
        out
    }

    #[test]
    fn constant_stays_constant() {
        let img = ImageF::filled(7, 5, 0.3).unwrap();
        for (w, h) in [(1, 1), (3, 9), (14, 10), (32, 32)] {
            let r = resize_bilinear(&img, w, h).unwrap();
            assert_eq!(r.dims(), (w, h));
            assert!(r.data().iter().all(|v| (v - 0.3).abs() < 1e-6));
        }
    }

    #[test]
    fn identity_size() {
        let img = test_pattern(13, 9).unwrap();
        let r = resize_bilinear(&img, 13, 9).unwrap();
        for (a, b) in img.data().iter().zip(r.data()) {
            assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn checker_upsample_matches_reference() {
        let checker = [0.0f32, 1.0, 1.0, 0.0];
        let img = ImageF::from_fn(2, 2, |x, y| [checker[y * 2 + x]; 3]).unwrap();
        let r = resize_bilinear(&img, 4, 4).unwrap();
        let expected = reference_bilinear(&checker, 2, 2, 4, 4);
        for y in 0..4 {
            for x in 0..4 {
                assert!((r.get(x, y, 0) - expected[y * 4 + x]).abs() < 1e-6);
            }
        }
        // center samples sit a quarter pixel from the source centers
        assert!((r.get(1, 1, 0) - 0.375).abs() < 1e-6);
        assert!((r.get(2, 1, 0) - 0.625).abs() < 1e-6);
    }

    #[test]
    fn arbitrary_resize_matches_reference() {
        let img = test_pattern(11, 7).unwrap();
        let chan: Vec<f32> = img.data().iter().step_by(3).copied().collect();
        let r = resize_bilinear(&img, 5, 13).unwrap();
        let expected = reference_bilinear(&chan, 11, 7, 5, 13);
        for (i, e) in expected.iter().enumerate() {
            assert!((r.data()[i * 3] - e).abs() < 1e-5);
        }
    }

    #[test]
    fn zero_size_rejected() {
        let img = ImageF::filled(4, 4, 0.0).unwrap();
        assert!(matches!(
            resize_bilinear(&img, 0, 4),
            Err(ImagingError::InvalidSize { .. })
        ));
        assert!(resize_area(&img, 4, 0).is_err());
        assert!(resize_nearest(&img, 0, 0).is_err());
    }

    #[test]
    fn area_downscale_averages_blocks() {
        let img = ImageF::from_fn(4, 2, |x, _| [x as f32; 3]).unwrap();
        let r = resize_area(&img, 2, 1).unwrap();
        assert!((r.get(0, 0, 0) - 0.5).abs() < 1e-6);
        assert!((r.get(1, 0, 0) - 2.5).abs() < 1e-6);
    }

    #[test]
    fn area_preserves_mean() {
        let img = test_pattern(32, 32).unwrap();
        let r = resize_area(&img, 27, 27).unwrap();
        let a = img.channel_means();
        let b = r.channel_means();
        for c in 0..3 {
            assert!((a[c] - b[c]).abs() < 1e-4);
        }
    }

    #[test]
    fn nearest_replicates() {
        let img = ImageF::from_fn(2, 2, |x, y| [(y * 2 + x) as f32; 3]).unwrap();
        let r = resize_nearest(&img, 4, 4).unwrap();
        assert_eq!(r.get(0, 0, 0), 0.0);
        assert_eq!(r.get(1, 1, 0), 0.0);
        assert_eq!(r.get(3, 0, 0), 1.0);
        assert_eq!(r.get(0, 3, 0), 2.0);
        assert_eq!(r.get(2, 2, 0), 3.0);
    }
}
