//! Foreground masks, bounding boxes and principal-axis alignment.
//!
//! The covariance of the foreground pixel coordinates is normalized by the
//! foreground count (no Bessel correction). Its major eigenvector gives the
//! body axis; [`align_horizontal`] rotates the fish so that axis is level,
//! crops to the rotated mask with a small margin and decides which end is
//! the head.

use image::{GrayImage, Luma, RgbImage};
use imageproc::distance_transform::Norm;
use imageproc::region_labelling::{connected_components, Connectivity};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Point};
use crate::raster::{sample_bilinear, to_rgb, BinaryMask, ColorImage};

/// Relative eigenvalue gap below which a shape has no usable axis.
pub const ISOTROPY_EPSILON: f64 = 0.05;

/// Thresholds for the classical segmenter used when no mask file is supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    /// Background color; `None` estimates it as the per-channel median of the image border.
    pub background: Option<[u8; 3]>,
    /// Euclidean RGB distance from the background above which a pixel is foreground.
    pub threshold: f64,
    /// Chebyshev radius of the opening that removes speckle.
    pub open_radius: u8,
    /// Chebyshev radius of the closing that fills pinholes.
    pub close_radius: u8,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            background: None,
            threshold: 40.0,
            open_radius: 1,
            close_radius: 2,
        }
    }
}

fn border_median(image: &ColorImage) -> [u8; 3] {
    let (w, h) = image.dimensions();
    let mut channels: [Vec<u8>; 3] = Default::default();
    let mut push = |x: u32, y: u32| {
        let p = image.get_pixel(x, y).0;
        for c in 0..3 {
            channels[c].push(p[c]);
        }
    };
    for x in 0..w {
        push(x, 0);
        if h > 1 {
            push(x, h - 1);
        }
    }
    for y in 1..h.saturating_sub(1) {
        push(0, y);
        if w > 1 {
            push(w - 1, y);
        }
    }
    channels.map(|mut v| {
        v.sort_unstable();
        v[v.len() / 2]
    })
}

/// Largest 8-connected component of `mask`; ties go to the component met first in raster order.
pub fn largest_component(mask: &BinaryMask) -> Option<BinaryMask> {
    let labels = connected_components(&mask.to_gray(), Connectivity::Eight, Luma([0u8]));
    let mut sizes: Vec<usize> = Vec::new();
    let mut first_seen: Vec<usize> = Vec::new();
    for (i, p) in labels.as_raw().iter().enumerate() {
        let l = *p as usize;
        if l == 0 {
            continue;
        }
        if sizes.len() <= l {
            sizes.resize(l + 1, 0);
            first_seen.resize(l + 1, usize::MAX);
        }
        sizes[l] += 1;
        first_seen[l] = first_seen[l].min(i);
    }
    let best = (1..sizes.len())
        .filter(|&l| sizes[l] > 0)
        .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(first_seen[b].cmp(&first_seen[a])))?;
    let keep = best as u32;
    let data = labels.as_raw().iter().map(|&l| l == keep).collect();
    BinaryMask::from_vec(mask.width(), mask.height(), data).ok()
}

/// Classical stand-in for a learned segmenter: global color-distance threshold
/// against a background model, morphological open/close, largest component.
pub fn mask_from_color_fallback(image: &ColorImage, config: &SegmentationConfig) -> Result<BinaryMask> {
    let (w, h) = image.dimensions();
    if w == 0 || h == 0 {
        return Err(Error::InvalidArgument("empty image".into()));
    }
    let bg = config.background.unwrap_or_else(|| border_median(image));
    let thr2 = config.threshold * config.threshold;
    let raw = GrayImage::from_fn(w, h, |x, y| {
        let p = image.get_pixel(x, y).0;
        let d2: f64 = (0..3).map(|c| (p[c] as f64 - bg[c] as f64).powi(2)).sum();
        Luma([if d2 > thr2 { 255 } else { 0 }])
    });
    let mut cleaned = raw;
    if config.open_radius > 0 {
        cleaned = imageproc::morphology::open(&cleaned, Norm::LInf, config.open_radius);
    }
    if config.close_radius > 0 {
        cleaned = imageproc::morphology::close(&cleaned, Norm::LInf, config.close_radius);
    }
    let mask = BinaryMask::from_gray(&cleaned);
    largest_component(&mask).ok_or(Error::NoForeground)
}

/// Tightest axis-aligned box covering every foreground pixel.
pub fn bbox_from_mask(mask: &BinaryMask) -> Result<BoundingBox> {
    let (x0, y0, x1, y1) = mask.extents().ok_or(Error::EmptyMask)?;
    Ok(BoundingBox::from_pixel_extents(x0, y0, x1, y1))
}

/// Second-order moments of a foreground and their eigen-decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeStats {
    pub count: usize,
    pub mean: Point,
    /// `[[sxx, sxy], [sxy, syy]]`, normalized by `count`.
    pub covariance: [[f64; 2]; 2],
    /// `(major, minor)`.
    pub eigenvalues: (f64, f64),
    /// Unit eigenvector of the major eigenvalue, sign fixed so that `x > 0` (or `y > 0` when vertical).
    pub principal_axis: (f64, f64),
}

impl ShapeStats {
    /// Axis angle in degrees, in `(-90, 90]`, measured in image coordinates (y down).
    pub fn angle_deg(&self) -> f64 {
        self.principal_axis.1.atan2(self.principal_axis.0).to_degrees()
    }
}

/// Moments without the isotropy check.
pub fn raw_moments(mask: &BinaryMask) -> Result<ShapeStats> {
    let mut count = 0usize;
    let (mut sx, mut sy) = (0.0f64, 0.0f64);
    for (x, y) in mask.foreground() {
        count += 1;
        sx += x as f64;
        sy += y as f64;
    }
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    let n = count as f64;
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy, mut syy) = (0.0f64, 0.0f64, 0.0f64);
    for (x, y) in mask.foreground() {
        let dx = x as f64 - mx;
        let dy = y as f64 - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let (a, b, c) = (sxx / n, sxy / n, syy / n);

    let mid = (a + c) / 2.0;
    let radius = ((a - c) / 2.0).hypot(b);
    let major = mid + radius;
    let minor = (mid - radius).max(0.0);
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    let (mut vx, mut vy) = (theta.cos(), theta.sin());
    if vx < 0.0 || (vx == 0.0 && vy < 0.0) {
        vx = -vx;
        vy = -vy;
    }
    Ok(ShapeStats {
        count,
        mean: Point::new(mx, my),
        covariance: [[a, b], [b, c]],
        eigenvalues: (major, minor),
        principal_axis: (vx, vy),
    })
}

/// Mean, covariance and principal axis of the foreground.
///
/// Fails with [`Error::DegenerateShape`] when the eigenvalue gap is below
/// [`ISOTROPY_EPSILON`] times the major eigenvalue.
pub fn shape_stats(mask: &BinaryMask) -> Result<ShapeStats> {
    let stats = raw_moments(mask)?;
    let (major, minor) = stats.eigenvalues;
    if stats.count < 2 || major <= 0.0 || major - minor < ISOTROPY_EPSILON * major {
        return Err(Error::DegenerateShape { major, minor });
    }
    Ok(stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadSide {
    Left,
    Right,
}

impl HeadSide {
    pub fn opposite(self) -> HeadSide {
        match self {
            HeadSide::Left => HeadSide::Right,
            HeadSide::Right => HeadSide::Left,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HeadSide::Left => "left",
            HeadSide::Right => "right",
        }
    }
}

impl std::str::FromStr for HeadSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(HeadSide::Left),
            "right" => Ok(HeadSide::Right),
            other => Err(Error::InvalidArgument(format!("unknown head side `{other}`"))),
        }
    }
}

/// How the head end is decided after rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum HeadSelection {
    /// The half (left/right of the centroid) holding more foreground.
    #[default]
    Auto,
    Fixed(HeadSide),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignConfig {
    /// Crop margin as a fraction of the longer side of the rotated foreground.
    pub margin_fraction: f64,
    pub head: HeadSelection,
    /// Mirror the output so the head ends up on this side.
    pub canonical_head: Option<HeadSide>,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            margin_fraction: 0.02,
            head: HeadSelection::Auto,
            canonical_head: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AlignedFish {
    pub image: ColorImage,
    pub mask: BinaryMask,
    /// Rotation applied to the input, degrees, including 180 when mirrored.
    pub rotation_deg: f64,
    /// Head end in the output image.
    pub head_side: HeadSide,
    /// Whether the output was mirrored to reach `canonical_head`.
    pub flipped: bool,
    /// Tight box of the input foreground.
    pub source_bbox: BoundingBox,
}

/// Foreground left and right of the centroid column; pixels on it count for neither.
pub fn half_areas(mask: &BinaryMask) -> Result<(usize, usize)> {
    let stats = raw_moments(mask)?;
    let cx = stats.mean.x;
    let (mut left, mut right) = (0usize, 0usize);
    for (x, _) in mask.foreground() {
        let x = x as f64;
        if x < cx {
            left += 1;
        } else if x > cx {
            right += 1;
        }
    }
    Ok((left, right))
}

/// Head end by the larger-half rule; ties resolve to the left.
pub fn infer_head_side(mask: &BinaryMask) -> Result<HeadSide> {
    let (left, right) = half_areas(mask)?;
    Ok(if right > left {
        HeadSide::Right
    } else {
        HeadSide::Left
    })
}

fn normalize_deg(mut d: f64) -> f64 {
    while d > 180.0 {
        d -= 360.0;
    }
    while d <= -180.0 {
        d += 360.0;
    }
    d
}

/// Rotates the fish so its principal axis is horizontal and crops around it.
///
/// The rotation is about the mask centroid. Output pixel `(u, v)` sits at
/// `origin + (u, v)` in the rotated frame, where the rotated frame coincides
/// with the input frame when the angle is zero; an already level fish is
/// therefore cropped without resampling.
pub fn align_horizontal(image: &ColorImage, mask: &BinaryMask, config: &AlignConfig) -> Result<AlignedFish> {
    if image.dimensions() != mask.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: mask.dimensions(),
            actual: image.dimensions(),
        });
    }
    let stats = shape_stats(mask)?;
    let source_bbox = bbox_from_mask(mask)?;
    let theta = stats.angle_deg().to_radians();
    let (sin, cos) = theta.sin_cos();
    let m = stats.mean;

    // forward: r = m + R(-theta) (p - m)
    let forward = |x: f64, y: f64| {
        let dx = x - m.x;
        let dy = y - m.y;
        (m.x + cos * dx + sin * dy, m.y - sin * dx + cos * dy)
    };
    let (mut rx0, mut ry0, mut rx1, mut ry1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for (x, y) in mask.foreground() {
        let (rx, ry) = forward(x as f64, y as f64);
        rx0 = rx0.min(rx);
        ry0 = ry0.min(ry);
        rx1 = rx1.max(rx);
        ry1 = ry1.max(ry);
    }
    let (rx0, ry0, rx1, ry1) = (rx0.round(), ry0.round(), rx1.round(), ry1.round());
    let longer = (rx1 - rx0 + 1.0).max(ry1 - ry0 + 1.0);
    let margin = (config.margin_fraction * longer).ceil();
    let ox = rx0 - margin;
    let oy = ry0 - margin;
    let out_w = (rx1 - rx0 + 1.0 + 2.0 * margin) as u32;
    let out_h = (ry1 - ry0 + 1.0 + 2.0 * margin) as u32;

    // inverse: p = m + R(theta) (r - m)
    let inverse = |u: u32, v: u32| {
        let dx = u as f64 + ox - m.x;
        let dy = v as f64 + oy - m.y;
        (m.x + cos * dx - sin * dy, m.y + sin * dx + cos * dy)
    };
    let mut out_mask = BinaryMask::from_fn(out_w, out_h, |u, v| {
        let (px, py) = inverse(u, v);
        mask.get_signed(px.round() as i64, py.round() as i64)
    });
    let mut out_image = RgbImage::from_fn(out_w, out_h, |u, v| {
        let (px, py) = inverse(u, v);
        sample_bilinear(image, px, py).map(to_rgb).unwrap_or(image::Rgb([0, 0, 0]))
    });

    let detected = match config.head {
        HeadSelection::Auto => infer_head_side(&out_mask)?,
        HeadSelection::Fixed(side) => side,
    };
    let mut rotation_deg = normalize_deg(-stats.angle_deg());
    let mut head_side = detected;
    let mut flipped = false;
    if let Some(target) = config.canonical_head {
        if target != detected {
            out_mask = out_mask.flip_horizontal();
            image::imageops::flip_horizontal_in_place(&mut out_image);
            rotation_deg = normalize_deg(rotation_deg + 180.0);
            head_side = target;
            flipped = true;
        }
    }

    Ok(AlignedFish {
        image: out_image,
        mask: out_mask,
        rotation_deg,
        head_side,
        flipped,
        source_bbox,
    })
}
