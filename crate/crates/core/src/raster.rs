//! Raster containers and the handful of sampling routines the pipeline needs.

use std::path::Path;

use image::{GrayImage, Luma, Rgb, RgbImage};

use crate::error::{Error, Result};

/// Color raster used throughout the crate.
pub type ColorImage = RgbImage;

/// Row-major foreground/background raster.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BinaryMask")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("foreground", &self.count())
            .finish()
    }
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Self {
        BinaryMask {
            width,
            height,
            data: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        BinaryMask {
            width,
            height,
            data,
        }
    }

    pub fn from_vec(width: u32, height: u32, data: Vec<bool>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(Error::InvalidArgument(format!(
                "mask data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(BinaryMask {
            width,
            height,
            data,
        })
    }

    /// Nonzero pixels are foreground.
    pub fn from_gray(image: &GrayImage) -> Self {
        BinaryMask {
            width: image.width(),
            height: image.height(),
            data: image.as_raw().iter().map(|&v| v >= 128).collect(),
        }
    }

    pub fn to_gray(&self) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |x, y| {
            Luma([if self.get(x, y) { 255 } else { 0 }])
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[y as usize * self.width as usize + x as usize]
    }

    /// Out-of-bounds reads are background.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as u64) < self.width as u64
            && (y as u64) < self.height as u64
            && self.get(x as u32, y as u32)
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.data[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&v| v)
    }

    pub fn foreground(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width as usize;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(move |(i, _)| ((i % w) as u32, (i / w) as u32))
    }

    /// Inclusive extents `(x0, y0, x1, y1)` of the foreground.
    pub fn extents(&self) -> Option<(u32, u32, u32, u32)> {
        let mut ext: Option<(u32, u32, u32, u32)> = None;
        for (x, y) in self.foreground() {
            ext = Some(match ext {
                None => (x, y, x, y),
                Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
            });
        }
        ext
    }

    pub fn flip_horizontal(&self) -> Self {
        BinaryMask::from_fn(self.width, self.height, |x, y| {
            self.get(self.width - 1 - x, y)
        })
    }

    /// Grows the canvas by `pad` background pixels on every side.
    pub fn padded(&self, pad: u32) -> Self {
        BinaryMask::from_fn(self.width + 2 * pad, self.height + 2 * pad, |x, y| {
            self.get_signed(x as i64 - pad as i64, y as i64 - pad as i64)
        })
    }
}

/// Bilinear sample at a continuous position; `None` outside the pixel-center hull.
pub fn sample_bilinear(image: &ColorImage, x: f64, y: f64) -> Option<[f64; 3]> {
    let (w, h) = image.dimensions();
    if !(x >= 0.0 && y >= 0.0 && x <= (w - 1) as f64 && y <= (h - 1) as f64) {
        return None;
    }
    let x0 = x.floor() as u32;
    let y0 = y.floor() as u32;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let p00 = image.get_pixel(x0, y0).0;
    let p10 = image.get_pixel(x1, y0).0;
    let p01 = image.get_pixel(x0, y1).0;
    let p11 = image.get_pixel(x1, y1).0;
    let mut out = [0.0; 3];
    for c in 0..3 {
        let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
        let bottom = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
        out[c] = top * (1.0 - fy) + bottom * fy;
    }
    Some(out)
}

pub(crate) fn to_rgb(v: [f64; 3]) -> Rgb<u8> {
    Rgb(v.map(|c| c.round().clamp(0.0, 255.0) as u8))
}

/// Bilinear resize with pixel-center alignment (source coordinate
/// `(u + 0.5) * src / dst - 0.5`, clamped to the edge).
pub fn resize_bilinear(image: &ColorImage, width: u32, height: u32) -> ColorImage {
    let (sw, sh) = image.dimensions();
    let sx = sw as f64 / width as f64;
    let sy = sh as f64 / height as f64;
    RgbImage::from_fn(width, height, |u, v| {
        let x = ((u as f64 + 0.5) * sx - 0.5).clamp(0.0, (sw - 1) as f64);
        let y = ((v as f64 + 0.5) * sy - 0.5).clamp(0.0, (sh - 1) as f64);
        to_rgb(sample_bilinear(image, x, y).expect("clamped inside"))
    })
}

/// Resizes a mask by bilinear interpolation of its 0/1 indicator, keeping values >= 0.5.
pub fn resize_mask(mask: &BinaryMask, width: u32, height: u32) -> BinaryMask {
    let (sw, sh) = mask.dimensions();
    let sx = sw as f64 / width as f64;
    let sy = sh as f64 / height as f64;
    let at = |x: u32, y: u32| if mask.get(x, y) { 1.0 } else { 0.0 };
    BinaryMask::from_fn(width, height, |u, v| {
        let x = ((u as f64 + 0.5) * sx - 0.5).clamp(0.0, (sw - 1) as f64);
        let y = ((v as f64 + 0.5) * sy - 0.5).clamp(0.0, (sh - 1) as f64);
        let x0 = x.floor() as u32;
        let y0 = y.floor() as u32;
        let x1 = (x0 + 1).min(sw - 1);
        let y1 = (y0 + 1).min(sh - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
        let bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy >= 0.5
    })
}

pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    let img = image::open(path).map_err(|e| Error::image(path, e))?;
    Ok(BinaryMask::from_gray(&img.to_luma8()))
}

pub fn write_mask(mask: &BinaryMask, path: &Path) -> Result<()> {
    mask.to_gray()
        .save(path)
        .map_err(|e| Error::image(path, e))
}

pub fn read_color(path: &Path) -> Result<ColorImage> {
    let img = image::open(path).map_err(|e| Error::image(path, e))?;
    Ok(img.to_rgb8())
}

pub fn write_color(image: &ColorImage, path: &Path) -> Result<()> {
    image.save(path).map_err(|e| Error::image(path, e))
}
