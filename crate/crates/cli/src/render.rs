//! Spectrogram images: time runs left to right, low frequencies at the
//! bottom, values quantized to 8 bits over the image's own min/max and
//! mapped through the viridis colormap.

use std::io::Write;

use anyhow::{ensure, Result};
use specaug::{Axis, MaskRecord, Spectrogram};

pub const OVERLAY_COLOR: [u8; 3] = [255, 0, 0];

/// An RGB8 raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Image {
    #[cfg(test)]
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = 3 * (y * self.width + x);
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn write_png<W: Write>(&self, out: W) -> Result<()> {
        let mut encoder = png::Encoder::new(out, u32::try_from(self.width)?, u32::try_from(self.height)?);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header()?;
        writer.write_image_data(&self.pixels)?;
        writer.finish()?;
        Ok(())
    }
}

fn palette() -> [[u8; 3]; 256] {
    let mut lut = [[0u8; 3]; 256];
    for (i, slot) in lut.iter_mut().enumerate() {
        let c = colorous::VIRIDIS.eval_continuous(i as f64 / 255.0);
        *slot = [c.r, c.g, c.b];
    }
    lut
}

/// 8-bit level of every bin; a constant matrix maps to level 0.
pub fn quantize(values: &[f32]) -> Vec<u8> {
    let (lo, hi) = values
        .iter()
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = f64::from(hi) - f64::from(lo);
    values
        .iter()
        .map(|&v| {
            if span > 0.0 {
                ((f64::from(v) - f64::from(lo)) / span * 255.0).round() as u8
            } else {
                0
            }
        })
        .collect()
}

pub fn render(spec: &Spectrogram, zoom: usize) -> Result<Image> {
    ensure!(zoom >= 1, "zoom must be at least 1");
    let (nu, tau) = (spec.nu(), spec.tau());
    let levels = quantize(spec.values());
    let lut = palette();
    let mut image = Image {
        width: tau * zoom,
        height: nu * zoom,
        pixels: vec![0; 3 * tau * zoom * nu * zoom],
    };
    for y in 0..image.height {
        let f = nu - 1 - y / zoom;
        for x in 0..image.width {
            image.set(x, y, lut[levels[f * tau + x / zoom] as usize]);
        }
    }
    Ok(image)
}

/// Pixel rectangle `(x0, y0, x1, y1)`, end-exclusive, covered by a mask.
pub fn mask_rect(mask: &MaskRecord, nu: usize, tau: usize, zoom: usize) -> (usize, usize, usize, usize) {
    match mask.axis {
        Axis::Time => (mask.start * zoom, 0, (mask.start + mask.width) * zoom, nu * zoom),
        // Row f is drawn at y = nu - 1 - f, so the band flips vertically.
        Axis::Frequency => (0, (nu - mask.start - mask.width) * zoom, tau * zoom, (nu - mask.start) * zoom),
    }
}

/// Outlines each non-empty mask rectangle in [`OVERLAY_COLOR`].
pub fn draw_overlay(image: &mut Image, masks: &[MaskRecord], nu: usize, tau: usize, zoom: usize) {
    for mask in masks.iter().filter(|m| m.width > 0) {
        let (x0, y0, x1, y1) = mask_rect(mask, nu, tau, zoom);
        for x in x0..x1 {
            image.set(x, y0, OVERLAY_COLOR);
            image.set(x, y1 - 1, OVERLAY_COLOR);
        }
        for y in y0..y1 {
            image.set(x0, y, OVERLAY_COLOR);
            image.set(x1 - 1, y, OVERLAY_COLOR);
        }
    }
}
