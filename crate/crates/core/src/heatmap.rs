//! Disease-occurrence heatmaps in a canonical fish frame.

use std::fmt::Write as _;

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::augmentation::gaussian_kernel_1d;
use crate::error::{Error, Result};
use crate::geometry::BoundingBox;
use crate::mask_ops::{bbox_from_mask, AlignedFish};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalFrame {
    pub width: u32,
    pub height: u32,
}

impl Default for CanonicalFrame {
    fn default() -> Self {
        CanonicalFrame {
            width: 512,
            height: 256,
        }
    }
}

/// Inclusive cell range `[x0, x1] x [y0, y1]` in a canonical frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Footprint {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl Footprint {
    pub fn mirrored(&self, frame: CanonicalFrame) -> Footprint {
        Footprint {
            x0: frame.width - 1 - self.x1,
            x1: frame.width - 1 - self.x0,
            ..*self
        }
    }

    pub fn cells(&self) -> usize {
        (self.x1 - self.x0 + 1) as usize * (self.y1 - self.y0 + 1) as usize
    }
}

/// Cells whose centers fall in the closed interval `[a, b]`, clipped to `[0, n)`.
/// A span that touches the frame but misses every center keeps the cell under
/// its midpoint, or both cells when the midpoint sits on their shared edge.
fn cell_span(a: f64, b: f64, n: u32) -> Option<(u32, u32)> {
    if b < 0.0 || a > n as f64 {
        return None;
    }
    let last = n as f64 - 1.0;
    let lo = (a - 0.5).ceil().max(0.0);
    let hi = (b - 0.5).floor().min(last);
    if lo <= hi {
        return Some((lo as u32, hi as u32));
    }
    let mid = (a + b) / 2.0;
    let left = if mid.fract() == 0.0 { mid - 1.0 } else { mid.floor() };
    Some((left.clamp(0.0, last) as u32, mid.floor().clamp(0.0, last) as u32))
}

/// Maps `bbox` from fish-bounding-box coordinates (`fish_box`) to canonical cells.
pub fn warp_box(bbox: &BoundingBox, fish_box: &BoundingBox, frame: CanonicalFrame) -> Result<Footprint> {
    if !bbox.is_valid() || !fish_box.is_valid() {
        return Err(Error::InvalidArgument("box without area".into()));
    }
    if bbox.intersection_area(fish_box) <= 0.0 {
        return Err(Error::OutOfFrame);
    }
    let sx = frame.width as f64 / fish_box.w;
    let sy = frame.height as f64 / fish_box.h;
    let x = |v: f64| (v - fish_box.left()) * sx;
    let y = |v: f64| (v - fish_box.top()) * sy;
    let (x0, x1) = cell_span(x(bbox.left()), x(bbox.right()), frame.width).ok_or(Error::OutOfFrame)?;
    let (y0, y1) = cell_span(y(bbox.top()), y(bbox.bottom()), frame.height).ok_or(Error::OutOfFrame)?;
    Ok(Footprint { x0, y0, x1, y1 })
}

/// [`warp_box`] against the bounding box of an aligned fish's mask.
pub fn warp_box_to_canonical(bbox: &BoundingBox, fish: &AlignedFish, frame: CanonicalFrame) -> Result<Footprint> {
    warp_box(bbox, &bbox_from_mask(&fish.mask)?, frame)
}

/// Per-cell footprint counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccurrenceGrid {
    pub frame: CanonicalFrame,
    pub counts: Vec<u32>,
}

impl OccurrenceGrid {
    pub fn new(frame: CanonicalFrame) -> Self {
        OccurrenceGrid {
            frame,
            counts: vec![0; frame.width as usize * frame.height as usize],
        }
    }

    pub fn add(&mut self, f: &Footprint) {
        let w = self.frame.width as usize;
        for y in f.y0..=f.y1 {
            let row = y as usize * w;
            for c in &mut self.counts[row + f.x0 as usize..=row + f.x1 as usize] {
                *c += 1;
            }
        }
    }

    /// Sum of two partial grids over the same frame.
    pub fn merge(mut self, other: &OccurrenceGrid) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self
    }
}

/// Normalized occurrence raster, row-major, values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub frame: CanonicalFrame,
    pub values: Vec<f64>,
}

pub const SMOOTHING_SIGMA: f64 = 3.0;

fn smooth(values: &[f64], frame: CanonicalFrame, sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as usize;
    let k = gaussian_kernel_1d(2 * radius + 1, sigma);
    let (w, h) = (frame.width as i64, frame.height as i64);
    let r = radius as i64;
    let pass = |src: &[f64], horizontal: bool| -> Vec<f64> {
        let mut out = vec![0.0; src.len()];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (i, t) in k.iter().enumerate() {
                    let d = i as i64 - r;
                    let (sx, sy) = if horizontal { (x + d, y) } else { (x, y + d) };
                    if sx >= 0 && sx < w && sy >= 0 && sy < h {
                        acc += t * src[(sy * w + sx) as usize];
                    }
                }
                out[(y * w + x) as usize] = acc;
            }
        }
        out
    };
    pass(&pass(values, true), false)
}

impl Heatmap {
    /// Optional Gaussian smoothing, then division by the maximum.
    pub fn from_grid(grid: &OccurrenceGrid, smoothing_sigma: Option<f64>) -> Result<Self> {
        let raw: Vec<f64> = grid.counts.iter().map(|&c| c as f64).collect();
        let values = match smoothing_sigma {
            Some(s) if s > 0.0 => smooth(&raw, grid.frame, s),
            _ => raw,
        };
        let max = values.iter().copied().fold(0.0, f64::max);
        if !(max > 0.0) {
            return Err(Error::EmptyInput);
        }
        Ok(Heatmap {
            frame: grid.frame,
            values: values.into_iter().map(|v| if v == max { 1.0 } else { v / max }).collect(),
        })
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[y as usize * self.frame.width as usize + x as usize]
    }

    /// Header line `heatmap <width> <height>`, then one line per row.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "heatmap {} {}", self.frame.width, self.frame.height).unwrap();
        for row in self.values.chunks(self.frame.width as usize) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        out
    }

    pub fn to_color_image(&self) -> RgbImage {
        RgbImage::from_fn(self.frame.width, self.frame.height, |x, y| colormap(self.get(x, y)))
    }
}

/// Black, purple, red, yellow, white ramp.
pub fn colormap(v: f64) -> Rgb<u8> {
    const STOPS: [[f64; 3]; 5] = [
        [0.0, 0.0, 4.0],
        [87.0, 16.0, 110.0],
        [188.0, 55.0, 84.0],
        [249.0, 142.0, 9.0],
        [252.0, 255.0, 164.0],
    ];
    let t = v.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - i as f64;
    Rgb([0, 1, 2].map(|c| (STOPS[i][c] * (1.0 - f) + STOPS[i + 1][c] * f).round() as u8))
}

/// Counts every footprint once, then normalizes.
pub fn accumulate_and_normalize(
    footprints: &[Footprint],
    frame: CanonicalFrame,
    smoothing_sigma: Option<f64>,
) -> Result<Heatmap> {
    if footprints.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut grid = OccurrenceGrid::new(frame);
    for f in footprints {
        if f.x1 >= frame.width || f.y1 >= frame.height || f.x0 > f.x1 || f.y0 > f.y1 {
            return Err(Error::OutOfFrame);
        }
        grid.add(f);
    }
    Heatmap::from_grid(&grid, smoothing_sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: CanonicalFrame = CanonicalFrame { width: 8, height: 4 };

    #[test]
    fn whole_fish_box_covers_the_frame() {
        let fish = BoundingBox::from_pixel_extents(10, 20, 109, 69);
        let f = warp_box(&fish, &fish, CanonicalFrame::default()).unwrap();
        assert_eq!(f, Footprint { x0: 0, y0: 0, x1: 511, y1: 255 });
    }

    #[test]
    fn centered_box_is_centered() {
        let fish = BoundingBox::new(60.0, 45.0, 100.0, 50.0);
        let f = warp_box(&BoundingBox::new(60.0, 45.0, 10.0, 10.0), &fish, CanonicalFrame::default()).unwrap();
        assert_eq!(f.x0 + f.x1, 511);
        assert_eq!(f.y0 + f.y1, 255);
    }

    #[test]
    fn box_outside_the_fish_is_rejected() {
        let fish = BoundingBox::new(60.0, 45.0, 100.0, 50.0);
        let far = BoundingBox::new(500.0, 45.0, 10.0, 10.0);
        assert!(matches!(warp_box(&far, &fish, CanonicalFrame::default()), Err(Error::OutOfFrame)));
    }

    #[test]
    fn single_and_disjoint_footprints() {
        let a = Footprint { x0: 1, y0: 1, x1: 2, y1: 2 };
        let h = accumulate_and_normalize(&[a], SMALL, None).unwrap();
        assert_eq!(h.get(1, 1), 1.0);
        assert_eq!(h.get(0, 0), 0.0);
        let b = Footprint { x0: 5, y0: 0, x1: 6, y1: 1 };
        let h = accumulate_and_normalize(&[a, b], SMALL, None).unwrap();
        assert_eq!((h.get(2, 2), h.get(6, 0)), (1.0, 1.0));
        assert!(matches!(accumulate_and_normalize(&[], SMALL, None), Err(Error::EmptyInput)));
    }

    #[test]
    fn smoothing_keeps_unit_max() {
        let a = Footprint { x0: 100, y0: 100, x1: 110, y1: 120 };
        let h = accumulate_and_normalize(&[a], CanonicalFrame::default(), Some(SMOOTHING_SIGMA)).unwrap();
        assert_eq!(h.values.iter().copied().fold(0.0, f64::max), 1.0);
        assert!(h.values.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(h.get(95, 110) > 0.0);
    }

    #[test]
    fn colormap_endpoints() {
        assert_eq!(colormap(0.0), Rgb([0, 0, 4]));
        assert_eq!(colormap(1.0), Rgb([252, 255, 164]));
    }

    #[test]
    fn text_grid_shape() {
        let h = accumulate_and_normalize(&[Footprint { x0: 0, y0: 0, x1: 0, y1: 0 }], SMALL, None).unwrap();
        let t = h.to_text();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "heatmap 8 4");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("1.000000 0.000000"));
    }
}
