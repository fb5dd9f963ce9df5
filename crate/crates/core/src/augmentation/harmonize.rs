use std::collections::HashSet;

use image::RgbImage;

use super::Placement;
use crate::error::{Error, Result};
use crate::raster::{to_rgb, BinaryMask, ColorImage};

type Mat3 = [[f64; 3]; 3];

const RGB_TO_LMS: Mat3 = [
    [0.3811, 0.5783, 0.0402],
    [0.1967, 0.7244, 0.0782],
    [0.0241, 0.1288, 0.8444],
];

fn mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn apply(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

fn invert(m: &Mat3) -> Mat3 {
    let c = |r: usize, k: usize| {
        let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
        let (k1, k2) = ((k + 1) % 3, (k + 2) % 3);
        m[r1][k1] * m[r2][k2] - m[r1][k2] * m[r2][k1]
    };
    let det = m[0][0] * c(0, 0) + m[0][1] * c(0, 1) + m[0][2] * c(0, 2);
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = c(j, i) / det;
        }
    }
    out
}

/// Linear opponent color space: the Reinhard LMS projection followed by the
/// l-alpha-beta rotation, without the log step so that channel means map back
/// to RGB means exactly.
pub struct OpponentSpace {
    forward: Mat3,
    inverse: Mat3,
}

impl Default for OpponentSpace {
    fn default() -> Self {
        let (a, b, c) = (1.0 / 3f64.sqrt(), 1.0 / 6f64.sqrt(), 1.0 / 2f64.sqrt());
        let to_lab = [[a, a, a], [b, b, -2.0 * b], [c, -c, 0.0]];
        let forward = mul(&to_lab, &RGB_TO_LMS);
        OpponentSpace {
            inverse: invert(&forward),
            forward,
        }
    }
}

impl OpponentSpace {
    pub fn to_opponent(&self, rgb: [f64; 3]) -> [f64; 3] {
        apply(&self.forward, rgb)
    }

    pub fn to_rgb(&self, v: [f64; 3]) -> [f64; 3] {
        apply(&self.inverse, v)
    }
}

/// Per-channel mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

impl ChannelStats {
    pub fn of(samples: &[[f64; 3]]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let n = samples.len() as f64;
        let mut mean = [0.0; 3];
        for s in samples {
            for c in 0..3 {
                mean[c] += s[c];
            }
        }
        mean = mean.map(|m| m / n);
        let mut var = [0.0; 3];
        for s in samples {
            for c in 0..3 {
                var[c] += (s[c] - mean[c]).powi(2);
            }
        }
        Some(ChannelStats {
            mean,
            std: var.map(|v| (v / n).sqrt()),
        })
    }
}

/// Below this, a channel counts as constant and only its mean is moved.
pub const FLAT_CHANNEL_STD: f64 = 1e-9;

/// Maps `source` statistics onto `target` statistics channel by channel.
pub fn transfer(v: [f64; 3], source: &ChannelStats, target: &ChannelStats) -> [f64; 3] {
    [0, 1, 2].map(|c| {
        let centered = v[c] - source.mean[c];
        if source.std[c] < FLAT_CHANNEL_STD {
            centered + target.mean[c]
        } else {
            centered * target.std[c] / source.std[c] + target.mean[c]
        }
    })
}

fn disk(radius: f64) -> Vec<(i64, i64)> {
    let r = radius.floor() as i64;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if ((dx * dx + dy * dy) as f64) <= radius * radius {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Fish pixels within `width` (Euclidean) of the placed foreground, excluding the foreground itself.
pub fn surrounding_ring(placement: &Placement, fish: &BinaryMask, width: f64) -> Vec<(u32, u32)> {
    let footprint: HashSet<(i64, i64)> = placement.foreground().collect();
    let mut ring: HashSet<(i64, i64)> = HashSet::new();
    let offsets = disk(width);
    for &(x, y) in &footprint {
        for &(dx, dy) in &offsets {
            let p = (x + dx, y + dy);
            if !footprint.contains(&p) && fish.get_signed(p.0, p.1) {
                ring.insert(p);
            }
        }
    }
    let mut ring: Vec<(u32, u32)> = ring.into_iter().map(|(x, y)| (x as u32, y as u32)).collect();
    ring.sort_unstable_by_key(|&(x, y)| (y, x));
    ring
}

fn pixel(image: &RgbImage, x: u32, y: u32) -> [f64; 3] {
    image.get_pixel(x, y).0.map(f64::from)
}

/// Recolors the placed patch so its foreground statistics match the ring of
/// fish pixels around it; the whole patch raster gets the same mapping.
pub fn harmonize_placement(
    placement: &Placement,
    fish_image: &ColorImage,
    fish_mask: &BinaryMask,
    ring_width: f64,
) -> Result<ColorImage> {
    let space = OpponentSpace::default();
    let ring = surrounding_ring(placement, fish_mask, ring_width);
    let ring_samples: Vec<[f64; 3]> = ring
        .iter()
        .map(|&(x, y)| space.to_opponent(pixel(fish_image, x, y)))
        .collect();
    let target = ChannelStats::of(&ring_samples).ok_or(Error::EmptyRing)?;
    let patch_samples: Vec<[f64; 3]> = placement
        .mask
        .foreground()
        .map(|(x, y)| space.to_opponent(pixel(&placement.image, x, y)))
        .collect();
    let source = ChannelStats::of(&patch_samples).ok_or(Error::EmptyMask)?;
    let (w, h) = placement.image.dimensions();
    Ok(RgbImage::from_fn(w, h, |x, y| {
        let v = space.to_opponent(pixel(&placement.image, x, y));
        to_rgb(space.to_rgb(transfer(v, &source, &target)))
    }))
}
