//! Head / fins / body segmentation of an aligned fish.
//!
//! The pipeline works on a horizontally aligned mask:
//!
//! 1. [`extract_boundary`] reduces the mask to smoothed upper and lower
//!    outlines, one sample per column.
//! 2. [`find_tail_points`] locates the caudal notches on both outlines and
//!    measures tail length and thickness; [`find_feature_points`] adds the
//!    head chord.
//! 3. [`fit_part_regions`] turns the points into three ellipses and a circle.
//! 4. [`rasterize_part_labels`] partitions the foreground.

mod boundary;
mod feature_points;
mod labels;
mod regions;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mask_ops::HeadSide;
use crate::raster::BinaryMask;

pub use boundary::{extract_boundary, BoundaryProfile};
pub use feature_points::{find_feature_points, find_tail_points, FeaturePointSet, TailPoints};
pub use labels::{assign_box_to_part, rasterize_part_labels, PartLabel, PartLabelMap};
pub use regions::{fit_part_regions, Circle, EllipseParams, PartRegions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyProfile {
    /// Flounder-like: ellipses are axis-aligned with the leveled fish.
    #[default]
    Flatfish,
    /// Salmon-like: ellipses follow the line joining the head and tail mean-points.
    Fusiform,
}

impl BodyProfile {
    pub fn as_str(self) -> &'static str {
        match self {
            BodyProfile::Flatfish => "flatfish",
            BodyProfile::Fusiform => "fusiform",
        }
    }
}

impl std::str::FromStr for BodyProfile {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flatfish" => Ok(BodyProfile::Flatfish),
            "fusiform" => Ok(BodyProfile::Fusiform),
            other => Err(crate::Error::InvalidArgument(format!("unknown body profile `{other}`"))),
        }
    }
}

/// Tunable constants of the part segmentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartConfig {
    /// Moving-average window applied to both outlines.
    pub smoothing_window: usize,
    /// Half-width, in columns, of the neighborhood an extremum must dominate.
    pub extremum_radius: usize,
    /// Fraction of the horizontal extent, from the tail end, searched for notches.
    pub tail_search_fraction: f64,
    /// Head center offset from the snout, in tail lengths.
    pub head_offset: f64,
    /// Tail circle radius, in tail thicknesses.
    pub tail_circle_ratio: f64,
    /// Fin band width between envelope and outline, in tail thicknesses.
    pub fin_band_ratio: f64,
    /// Widest run of empty columns bridged by interpolation.
    pub gap_tolerance: u32,
}

impl Default for PartConfig {
    fn default() -> Self {
        PartConfig {
            smoothing_window: 9,
            extremum_radius: 5,
            tail_search_fraction: 0.4,
            head_offset: 0.5,
            tail_circle_ratio: 0.75,
            fin_band_ratio: 0.5,
            gap_tolerance: 3,
        }
    }
}

/// Everything produced for one fish.
#[derive(Debug, Clone)]
pub struct PartSegmentation {
    pub profile: BoundaryProfile,
    pub points: FeaturePointSet,
    pub regions: PartRegions,
    pub labels: PartLabelMap,
    pub body_profile: BodyProfile,
}

/// Runs the full chain on an aligned mask.
pub fn segment_parts(
    mask: &BinaryMask,
    head_side: HeadSide,
    body_profile: BodyProfile,
    config: &PartConfig,
) -> Result<PartSegmentation> {
    let profile = extract_boundary(mask, config)?;
    let points = find_feature_points(&profile, head_side, config)?;
    let regions = fit_part_regions(mask, &points, body_profile, config)?;
    let labels = rasterize_part_labels(mask, &regions);
    Ok(PartSegmentation {
        profile,
        points,
        regions,
        labels,
        body_profile,
    })
}

impl PartSegmentation {
    /// Plain-text record of the feature points and fitted shapes.
    pub fn sidecar(&self) -> String {
        use std::fmt::Write;
        let p = &self.points;
        let mut s = String::new();
        let pt = |s: &mut String, name: &str, q: crate::Point| {
            let _ = writeln!(s, "{name} {:.4} {:.4}", q.x, q.y);
        };
        let _ = writeln!(s, "profile {}", self.body_profile.as_str());
        let _ = writeln!(s, "head_side {}", p.head_side.as_str());
        pt(&mut s, "tail_up", p.tail_up);
        pt(&mut s, "tail_low", p.tail_low);
        pt(&mut s, "tail_center", p.tail_center);
        let _ = writeln!(s, "tail_length {:.4}", p.tail_length);
        let _ = writeln!(s, "tail_thickness {:.4}", p.tail_thickness);
        pt(&mut s, "head_center", p.head_center);
        pt(&mut s, "head_up", p.head_up);
        pt(&mut s, "head_low", p.head_low);
        for (name, e) in [
            ("head", &self.regions.head),
            ("body", &self.regions.body),
            ("fin_envelope", &self.regions.fin_envelope),
        ] {
            let _ = writeln!(
                s,
                "ellipse {name} {:.4} {:.4} {:.4} {:.4} {:.4}",
                e.center.x, e.center.y, e.semi_major, e.semi_minor, e.axis_angle_deg
            );
        }
        let c = &self.regions.tail_circle;
        let _ = writeln!(s, "circle tail {:.4} {:.4} {:.4}", c.center.x, c.center.y, c.radius);
        let [bg, head, fins, body] = self.labels.counts();
        let _ = writeln!(s, "pixels background={bg} head={head} fins={fins} body={body}");
        s
    }
}
