//! 8-bit PNG images as `H x W x 3` tensors.

use std::path::Path;

use image::{ColorType, DynamicImage, ImageFormat, ImageReader, RgbImage};

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, ObservationMask};

fn unsupported(path: &Path, reason: impl Into<String>) -> Error {
    Error::UnsupportedImage {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn decode(path: &Path) -> Result<DynamicImage> {
    let reader = ImageReader::open(path)?.with_guessed_format()?;
    if reader.format() != Some(ImageFormat::Png) {
        return Err(unsupported(path, "only PNG input is supported"));
    }
    let img = reader.decode()?;
    match img.color() {
        ColorType::L8 | ColorType::La8 | ColorType::Rgb8 | ColorType::Rgba8 => Ok(img),
        other => Err(unsupported(path, format!("{other:?}: only 8-bit channels are supported"))),
    }
}

/// Loads an 8-bit PNG as a `height x width x 3` tensor with values in
/// `[0, 255]`. Grayscale is replicated into three channels; alpha is dropped.
pub fn load_image(path: impl AsRef<Path>) -> Result<DenseTensor> {
    let rgb = decode(path.as_ref())?.to_rgb8();
    Ok(rgb_to_tensor(&rgb))
}

pub fn rgb_to_tensor(rgb: &RgbImage) -> DenseTensor {
    let (w, h) = rgb.dimensions();
    DenseTensor::from_fn(vec![h as usize, w as usize, 3], |i| {
        rgb.get_pixel(i[1] as u32, i[0] as u32)[i[2]] as f64
    })
    .expect("image dimensions are nonzero")
}

/// Converts to 8-bit RGB: clip to `[0, 255]`, round half away from zero.
pub fn tensor_to_rgb(t: &DenseTensor) -> Result<RgbImage> {
    let shape = t.shape();
    if shape.len() != 3 || shape[2] != 3 {
        return Err(Error::ShapeMismatch {
            expected: vec![shape.first().copied().unwrap_or(0), shape.get(1).copied().unwrap_or(0), 3],
            found: shape.to_vec(),
        });
    }
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    let (h, w) = (shape[0], shape[1]);
    let mut img = RgbImage::new(w as u32, h as u32);
    let data = t.data();
    for (x, y, px) in img.enumerate_pixels_mut() {
        for c in 0..3 {
            let v = data[y as usize + h * (x as usize + w * c)];
            px[c] = v.clamp(0.0, 255.0).round() as u8;
        }
    }
    Ok(img)
}

pub fn save_image(t: &DenseTensor, path: impl AsRef<Path>) -> Result<()> {
    tensor_to_rgb(t)?.save_with_format(path.as_ref(), ImageFormat::Png)?;
    Ok(())
}

/// Loads a PNG mask: an entry is observed where the pixel channel is
/// nonzero. Grayscale masks apply to all three channels.
pub fn load_mask(path: impl AsRef<Path>) -> Result<ObservationMask> {
    let t = load_image(path)?;
    let flags = t.data().iter().map(|&v| v > 0.0).collect();
    ObservationMask::from_flags(t.shape().to_vec(), flags)
}

/// Writes a mask as a PNG, observed entries white.
pub fn save_mask(mask: &ObservationMask, path: impl AsRef<Path>) -> Result<()> {
    let data = mask.flags().iter().map(|&o| if o { 255.0 } else { 0.0 }).collect();
    save_image(&DenseTensor::new(mask.shape().to_vec(), data)?, path)
}
