use std::io::Cursor;
use std::path::Path;

use image::codecs::jpeg::JpegEncoder;
use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder, ImageFormat};

use super::{clamp_quantize, to_unit_float, Image8, ImageF, ImagingError, Result};

/// Decodes PNG or JPEG bytes to RGB. Alpha is composited over black;
/// grayscale is promoted to RGB.
pub fn decode_image(bytes: &[u8]) -> Result<Image8> {
    let dynamic = image::load_from_memory(bytes)?;
    let rgba = dynamic.to_rgba8();
    let (w, h) = (rgba.width() as usize, rgba.height() as usize);
    let mut data = Vec::with_capacity(w * h * 3);
    for px in rgba.pixels() {
        let [r, g, b, a] = px.0;
        if a == 255 {
            data.extend_from_slice(&[r, g, b]);
        } else {
            let over = |c: u8| ((c as u32 * a as u32 + 127) / 255) as u8;
            data.extend_from_slice(&[over(r), over(g), over(b)]);
        }
    }
    Image8::new(w, h, data)
}

pub fn load_image(path: impl AsRef<Path>) -> Result<Image8> {
    decode_image(&std::fs::read(path)?)
}

pub fn encode_png(img: &Image8) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    PngEncoder::new(&mut buf).write_image(
        img.data(),
        img.width() as u32,
        img.height() as u32,
        ExtendedColorType::Rgb8,
    )?;
    Ok(buf)
}

pub fn save_png(img: &Image8, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_png(img)?)?;
    Ok(())
}

/// Quantizes, encodes as baseline JPEG at `quality` and decodes back.
pub fn jpeg_roundtrip(img: &ImageF, quality: u8) -> Result<ImageF> {
    if !(1..=100).contains(&quality) {
        return Err(ImagingError::InvalidQuality(quality));
    }
    let q = clamp_quantize(img)?;
    let mut buf = Vec::new();
    JpegEncoder::new_with_quality(&mut buf, quality).encode(
        q.data(),
        q.width() as u32,
        q.height() as u32,
        ExtendedColorType::Rgb8,
    )?;
    let decoded = image::load(Cursor::new(&buf), ImageFormat::Jpeg)?.to_rgb8();
    let out = Image8::new(
        decoded.width() as usize,
        decoded.height() as usize,
        decoded.into_raw(),
    )?;
    Ok(to_unit_float(&out))
}
