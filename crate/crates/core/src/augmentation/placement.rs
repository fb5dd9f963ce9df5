use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AugmentConfig, AugmentationPlan, PatchRecord, TargetFish};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::raster::{resize_bilinear, resize_mask, BinaryMask, ColorImage};

/// A patch resampled to its planned scale and pinned to fish coordinates.
#[derive(Debug, Clone)]
pub struct Placement {
    pub image: ColorImage,
    pub mask: BinaryMask,
    /// Fish-frame position of the scaled patch's top-left pixel.
    pub origin: (i64, i64),
}

impl Placement {
    /// Fish-frame pixels covered by the scaled disease foreground.
    pub fn foreground(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let (ox, oy) = self.origin;
        self.mask.foreground().map(move |(x, y)| (ox + x as i64, oy + y as i64))
    }

    /// Whether every placed foreground pixel lands on the fish.
    pub fn inside(&self, fish: &BinaryMask) -> bool {
        self.foreground().all(|(x, y)| fish.get_signed(x, y))
    }
}

pub fn scaled_size(width: u32, height: u32, scale: f64) -> (u32, u32) {
    let s = |v: u32| ((v as f64 * scale).round() as u32).max(1);
    (s(width), s(height))
}

/// Anchor of a scaled patch whose top-left pixel sits at `origin`.
fn anchor_for(origin: (i64, i64), size: (u32, u32)) -> Point {
    Point::new(
        origin.0 as f64 + (size.0 as f64 - 1.0) / 2.0,
        origin.1 as f64 + (size.1 as f64 - 1.0) / 2.0,
    )
}

fn origin_for(anchor: Point, size: (u32, u32)) -> (i64, i64) {
    (
        (anchor.x - (size.0 as f64 - 1.0) / 2.0).round() as i64,
        (anchor.y - (size.1 as f64 - 1.0) / 2.0).round() as i64,
    )
}

/// Resamples the patch for `plan` (bilinear image, thresholded bilinear mask).
pub fn place(patch: &PatchRecord, plan: &AugmentationPlan) -> Result<Placement> {
    if !(plan.scale > 0.0 && plan.scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale {}", plan.scale)));
    }
    let (w, h) = patch.mask.dimensions();
    let size = scaled_size(w, h, plan.scale);
    let mask = resize_mask(&patch.mask, size.0, size.1);
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    Ok(Placement {
        image: resize_bilinear(&patch.image, size.0, size.1),
        mask,
        origin: origin_for(plan.anchor, size),
    })
}

/// Draws a scale, then anchors until the scaled foreground fits on the fish.
///
/// Anchors are drawn uniformly over the integer offsets for which the scaled
/// foreground's bounding box stays inside the fish's; each draw is then
/// checked pixel by pixel.
pub fn sample_placement(
    patch: &PatchRecord,
    fish: &TargetFish,
    seed: u64,
    config: &AugmentConfig,
) -> Result<AugmentationPlan> {
    let (lo, hi) = config.scale_range;
    let min_fg = patch.mask.count() as f64 * lo * lo;
    if min_fg > fish.mask.count() as f64 {
        return Err(Error::PlacementInfeasible { attempts: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = rng.random_range(lo..=hi);
    let (w, h) = patch.mask.dimensions();
    let size = scaled_size(w, h, scale);
    let mask = resize_mask(&patch.mask, size.0, size.1);
    let (px0, py0, px1, py1) = mask.extents().ok_or(Error::EmptyMask)?;
    let (fx0, fy0, fx1, fy1) = fish.mask.extents().ok_or(Error::EmptyMask)?;
    let x_range = (fx0 as i64 - px0 as i64)..=(fx1 as i64 - px1 as i64);
    let y_range = (fy0 as i64 - py0 as i64)..=(fy1 as i64 - py1 as i64);
    if x_range.is_empty() || y_range.is_empty() {
        return Err(Error::PlacementInfeasible { attempts: 0 });
    }
    let fg: Vec<(u32, u32)> = mask.foreground().collect();
    for _ in 0..config.max_retries {
        let ox = rng.random_range(x_range.clone());
        let oy = rng.random_range(y_range.clone());
        if fg.iter().all(|&(x, y)| fish.mask.get_signed(ox + x as i64, oy + y as i64)) {
            return Ok(AugmentationPlan {
                patch_id: patch.id.clone(),
                fish_id: fish.id.clone(),
                anchor: anchor_for((ox, oy), size),
                scale,
                seed,
            });
        }
    }
    Err(Error::PlacementInfeasible {
        attempts: config.max_retries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_and_origin_invert() {
        for size in [(5, 7), (6, 6), (1, 2)] {
            for origin in [(0, 0), (-3, 11), (40, 2)] {
                assert_eq!(origin_for(anchor_for(origin, size), size), origin);
            }
        }
    }

    #[test]
    fn scaled_size_rounds_and_stays_positive() {
        assert_eq!(scaled_size(30, 25, 0.8), (24, 20));
        assert_eq!(scaled_size(1, 1, 0.8), (1, 1));
    }
}
