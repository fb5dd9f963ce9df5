//! Disease-patch compositing: placement sampling, color harmonization,
//! boundary blurring and the reproducibility manifest.

mod blur;
mod composite;
mod harmonize;
mod manifest;
mod placement;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use blur::{blur_boundary, gaussian_kernel, gaussian_kernel_1d, Matte, BLUR_SIGMA, BLUR_SIZE};
pub use composite::{blend, composite, matte_box};
pub use harmonize::{harmonize_placement, surrounding_ring, transfer, ChannelStats, OpponentSpace, FLAT_CHANNEL_STD};
pub use manifest::{format_manifest, parse_manifest, read_manifest, write_manifest, ManifestRecord};
pub use placement::{place, sample_placement, scaled_size, Placement};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Point};
use crate::part_segmentation::{PartLabel, PartLabelMap};
use crate::raster::{BinaryMask, ColorImage};

/// A pre-generated disease patch; pixels outside `mask` are the healthy margin.
#[derive(Debug, Clone)]
pub struct PatchRecord {
    pub id: String,
    pub image: ColorImage,
    pub mask: BinaryMask,
}

impl PatchRecord {
    pub fn new(id: impl Into<String>, image: ColorImage, mask: BinaryMask) -> Result<Self> {
        if image.dimensions() != mask.dimensions() {
            return Err(Error::DimensionMismatch {
                expected: image.dimensions(),
                actual: mask.dimensions(),
            });
        }
        if mask.is_empty() {
            return Err(Error::EmptyMask);
        }
        Ok(PatchRecord {
            id: id.into(),
            image,
            mask,
        })
    }
}

/// A disease-free fish to composite onto.
#[derive(Debug, Clone)]
pub struct TargetFish {
    pub id: String,
    pub image: ColorImage,
    pub mask: BinaryMask,
    pub labels: Option<PartLabelMap>,
}

impl TargetFish {
    pub fn new(id: impl Into<String>, image: ColorImage, mask: BinaryMask, labels: Option<PartLabelMap>) -> Result<Self> {
        if image.dimensions() != mask.dimensions() {
            return Err(Error::DimensionMismatch {
                expected: image.dimensions(),
                actual: mask.dimensions(),
            });
        }
        if let Some(l) = &labels {
            if l.dimensions() != mask.dimensions() {
                return Err(Error::DimensionMismatch {
                    expected: mask.dimensions(),
                    actual: l.dimensions(),
                });
            }
        }
        if mask.is_empty() {
            return Err(Error::EmptyMask);
        }
        Ok(TargetFish {
            id: id.into(),
            image,
            mask,
            labels,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationPlan {
    pub patch_id: String,
    pub fish_id: String,
    /// Center of the scaled patch, fish pixels.
    pub anchor: Point,
    pub scale: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct AugmentedSample {
    pub image: ColorImage,
    pub gt_box: BoundingBox,
    pub part_class: Option<PartLabel>,
    pub plan: AugmentationPlan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    pub scale_range: (f64, f64),
    pub max_retries: u32,
    /// Width of the band of fish pixels whose statistics the patch is matched to.
    pub ring_width: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            scale_range: (0.8, 1.2),
            max_retries: 1000,
            ring_width: 8.0,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.scale_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale range [{lo}, {hi}]")));
        }
        if self.max_retries == 0 {
            return Err(Error::InvalidArgument("max_retries must be positive".into()));
        }
        if !(self.ring_width >= 1.0 && self.ring_width.is_finite()) {
            return Err(Error::InvalidArgument(format!("ring width {}", self.ring_width)));
        }
        Ok(())
    }
}

/// `|P| x |H| x N_s`, or `Overflow` if it does not fit.
pub fn combination_count(n_patches: u64, n_fish: u64, n_size_variants: u64) -> Result<u64> {
    n_patches
        .checked_mul(n_fish)
        .and_then(|v| v.checked_mul(n_size_variants))
        .ok_or(Error::Overflow("combination count"))
}

/// The patch recolored for `plan`, at its planned scale.
pub fn harmonize_colors(
    patch: &PatchRecord,
    fish: &TargetFish,
    plan: &AugmentationPlan,
    config: &AugmentConfig,
) -> Result<ColorImage> {
    let placement = place(patch, plan)?;
    harmonize_placement(&placement, &fish.image, &fish.mask, config.ring_width)
}

/// Margin added around the scaled patch so the blurred edge is not cut off.
const MATTE_PAD: u32 = (BLUR_SIZE / 2) as u32;

/// Full pipeline for one plan: resample, harmonize, blur the mask, blend.
/// Uses no randomness, so a plan always renders to the same image.
pub fn render_plan(
    patch: &PatchRecord,
    fish: &TargetFish,
    plan: &AugmentationPlan,
    config: &AugmentConfig,
) -> Result<AugmentedSample> {
    let placement = place(patch, plan)?;
    let adjusted = harmonize_placement(&placement, &fish.image, &fish.mask, config.ring_width)?;
    let pad = MATTE_PAD;
    let (w, h) = adjusted.dimensions();
    // edge-replicate the recolored margin under the padded matte
    let padded = ColorImage::from_fn(w + 2 * pad, h + 2 * pad, |x, y| {
        let sx = (x as i64 - pad as i64).clamp(0, w as i64 - 1) as u32;
        let sy = (y as i64 - pad as i64).clamp(0, h as i64 - 1) as u32;
        *adjusted.get_pixel(sx, sy)
    });
    let matte = blur_boundary(&placement.mask.padded(pad));
    let origin = (placement.origin.0 - pad as i64, placement.origin.1 - pad as i64);
    composite(fish, &padded, &matte, origin, plan)
}

/// Plans drawn from one seeded stream: each draw picks a patch and a fish and
/// a per-plan placement seed. Infeasible draws are reported, not retried;
/// drawing stops after `count` plans or `max_draws` draws.
pub fn plan_samples(
    patches: &[PatchRecord],
    fish: &[TargetFish],
    count: usize,
    seed: u64,
    max_draws: usize,
    config: &AugmentConfig,
) -> Result<(Vec<AugmentationPlan>, Vec<(String, String, Error)>)> {
    if patches.is_empty() || fish.is_empty() {
        return Err(Error::EmptyInput);
    }
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plans = Vec::with_capacity(count);
    let mut failures = Vec::new();
    let mut draws = 0;
    while plans.len() < count && draws < max_draws {
        draws += 1;
        let p = &patches[rng.random_range(0..patches.len())];
        let f = &fish[rng.random_range(0..fish.len())];
        let plan_seed: u64 = rng.random();
        match sample_placement(p, f, plan_seed, config) {
            Ok(plan) => plans.push(plan),
            Err(e) => failures.push((p.id.clone(), f.id.clone(), e)),
        }
    }
    Ok((plans, failures))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combination_counts() {
        assert_eq!(combination_count(462, 59, 1).unwrap(), 27_258);
        assert_eq!(combination_count(0, 17, 4).unwrap(), 0);
        assert_eq!(combination_count(3, 4, 5).unwrap(), 60);
        assert!(matches!(combination_count(u64::MAX, 2, 1), Err(Error::Overflow(_))));
    }

    #[test]
    fn config_validation() {
        assert!(AugmentConfig::default().validate().is_ok());
        let bad = AugmentConfig {
            scale_range: (1.2, 0.8),
            ..AugmentConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
