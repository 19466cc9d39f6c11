//! Fixed colour ramp and PNG encoding shared by the map renderers.

use crate::error::{Error, Result};
use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder};

/// Evenly spaced stops from low (dark blue) to high (dark red).
pub const RAMP: [[u8; 3]; 5] = [
    [20, 30, 140],
    [0, 150, 220],
    [60, 190, 80],
    [250, 220, 40],
    [200, 30, 30],
];
pub const EXCLUDED_RGB: [u8; 3] = [128, 128, 128];
pub const NO_SIGNAL_RGB: [u8; 3] = [0, 0, 0];
pub const BACKGROUND_RGB: [u8; 3] = [255, 255, 255];

/// Colour for `t` in [0, 1]; values outside are clamped.
pub fn ramp(t: f64) -> [u8; 3] {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let x = t * (RAMP.len() - 1) as f64;
    let k = (x.floor() as usize).min(RAMP.len() - 2);
    let f = x - k as f64;
    let mut c = [0u8; 3];
    for i in 0..3 {
        let (a, b) = (RAMP[k][i] as f64, RAMP[k + 1][i] as f64);
        c[i] = (a + (b - a) * f).round() as u8;
    }
    c
}

pub fn encode_png(width: u32, height: u32, rgb: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(rgb, width, height, ExtendedColorType::Rgb8)
        .map_err(|e| Error::Domain(format!("png encoding failed: {e}")))?;
    Ok(out)
}

/// RGB raster with simple filled primitives.
#[derive(Debug, Clone)]
pub struct Canvas {
    pub width: u32,
    pub height: u32,
    pub rgb: Vec<u8>,
}

impl Canvas {
    pub fn new(width: u32, height: u32, fill: [u8; 3]) -> Canvas {
        let mut rgb = Vec::with_capacity((width * height * 3) as usize);
        for _ in 0..width * height {
            rgb.extend_from_slice(&fill);
        }
        Canvas { width, height, rgb }
    }

    pub fn set(&mut self, x: i64, y: i64, c: [u8; 3]) {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return;
        }
        let p = ((y as usize) * self.width as usize + x as usize) * 3;
        self.rgb[p..p + 3].copy_from_slice(&c);
    }

    pub fn fill_rect(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, c: [u8; 3]) {
        for y in y0.min(y1)..=y0.max(y1) {
            for x in x0.min(x1)..=x0.max(x1) {
                self.set(x, y, c);
            }
        }
    }

    pub fn fill_circle(&mut self, cx: i64, cy: i64, r: i64, c: [u8; 3]) {
        for y in -r..=r {
            for x in -r..=r {
                if x * x + y * y <= r * r {
                    self.set(cx + x, cy + y, c);
                }
            }
        }
    }

    pub fn cross(&mut self, cx: i64, cy: i64, r: i64, c: [u8; 3]) {
        for d in -r..=r {
            for w in -1..=1 {
                self.set(cx + d, cy + d + w, c);
                self.set(cx + d, cy - d + w, c);
            }
        }
    }

    pub fn to_png(&self) -> Result<Vec<u8>> {
        encode_png(self.width, self.height, &self.rgb)
    }
}
