use super::{AugmentationPlan, AugmentedSample, Matte, TargetFish};
use crate::error::{Error, Result};
use crate::geometry::BoundingBox;
use crate::part_segmentation::assign_box_to_part;
use crate::raster::{to_rgb, ColorImage};

/// Blends `patch` over `fish` with weights `matte`, both pinned at `origin`.
/// Only pixels with positive weight are written.
pub fn blend(fish: &ColorImage, patch: &ColorImage, matte: &Matte, origin: (i64, i64)) -> Result<ColorImage> {
    if patch.dimensions() != (matte.width, matte.height) {
        return Err(Error::DimensionMismatch {
            expected: patch.dimensions(),
            actual: (matte.width, matte.height),
        });
    }
    let mut image = fish.clone();
    for_weighted(matte, origin, fish.dimensions(), |x, y, tx, ty, a| {
        let p = patch.get_pixel(x, y).0;
        let f = image.get_pixel(tx, ty).0;
        let v = [0, 1, 2].map(|c| a * p[c] as f64 + (1.0 - a) * f[c] as f64);
        image.put_pixel(tx, ty, to_rgb(v));
    });
    Ok(image)
}

/// Tight box of the image pixels whose weight exceeds one half.
pub fn matte_box(matte: &Matte, origin: (i64, i64), image_size: (u32, u32)) -> Option<BoundingBox> {
    let mut extent: Option<(u32, u32, u32, u32)> = None;
    for_weighted(matte, origin, image_size, |_, _, tx, ty, a| {
        if a > 0.5 {
            extent = Some(match extent {
                None => (tx, ty, tx, ty),
                Some((x0, y0, x1, y1)) => (x0.min(tx), y0.min(ty), x1.max(tx), y1.max(ty)),
            });
        }
    });
    extent.map(|(x0, y0, x1, y1)| BoundingBox::from_pixel_extents(x0, y0, x1, y1))
}

/// Calls `f(matte_x, matte_y, image_x, image_y, alpha)` for every positive weight landing on the image.
fn for_weighted(matte: &Matte, origin: (i64, i64), (w, h): (u32, u32), mut f: impl FnMut(u32, u32, u32, u32, f64)) {
    for y in 0..matte.height {
        for x in 0..matte.width {
            let a = matte.get(x, y);
            let (tx, ty) = (origin.0 + x as i64, origin.1 + y as i64);
            if a <= 0.0 || tx < 0 || ty < 0 || tx >= w as i64 || ty >= h as i64 {
                continue;
            }
            f(x, y, tx as u32, ty as u32, a);
        }
    }
}

/// [`blend`] plus the ground-truth box (weights above one half) and its part class.
pub fn composite(
    fish: &TargetFish,
    patch: &ColorImage,
    matte: &Matte,
    origin: (i64, i64),
    plan: &AugmentationPlan,
) -> Result<AugmentedSample> {
    let image = blend(&fish.image, patch, matte, origin)?;
    let gt_box = matte_box(matte, origin, image.dimensions()).ok_or(Error::EmptyMask)?;
    let part_class = fish
        .labels
        .as_ref()
        .and_then(|labels| assign_box_to_part(&gt_box, labels).ok());
    Ok(AugmentedSample {
        image,
        gt_box,
        part_class,
        plan: plan.clone(),
    })
}
