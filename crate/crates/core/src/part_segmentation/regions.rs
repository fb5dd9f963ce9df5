use serde::{Deserialize, Serialize};

use super::{BodyProfile, FeaturePointSet, PartConfig};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::raster::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseParams {
    pub center: Point,
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Direction of the major axis, degrees, in `(-90, 90]`.
    pub axis_angle_deg: f64,
}

fn fold_axis_angle(mut deg: f64) -> f64 {
    while deg > 90.0 {
        deg -= 180.0;
    }
    while deg <= -90.0 {
        deg += 180.0;
    }
    deg
}

impl EllipseParams {
    /// Ellipse with semi-axis `along` in direction `angle_deg` and `across` perpendicular to it.
    pub fn from_axes(center: Point, angle_deg: f64, along: f64, across: f64) -> Self {
        let (semi_major, semi_minor, angle) = if across > along {
            (across, along, angle_deg + 90.0)
        } else {
            (along, across, angle_deg)
        };
        EllipseParams {
            center,
            semi_major,
            semi_minor,
            axis_angle_deg: fold_axis_angle(angle),
        }
    }

    /// Normalized radius: `<= 1` inside.
    pub fn level(&self, p: Point) -> f64 {
        let (s, c) = self.axis_angle_deg.to_radians().sin_cos();
        let dx = p.x - self.center.x;
        let dy = p.y - self.center.y;
        let along = dx * c + dy * s;
        let across = -dx * s + dy * c;
        (along / self.semi_major).powi(2) + (across / self.semi_minor).powi(2)
    }

    pub fn contains(&self, p: Point) -> bool {
        self.level(p) <= 1.0
    }

    fn validate(&self, name: &str) -> Result<()> {
        let ok = self.semi_minor > 0.0
            && self.semi_major >= self.semi_minor
            && self.semi_major.is_finite()
            && self.center.x.is_finite()
            && self.center.y.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Geometry(format!(
                "{name} ellipse axes {:.3} / {:.3}",
                self.semi_major, self.semi_minor
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn contains(&self, p: Point) -> bool {
        p.distance(self.center) <= self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartRegions {
    pub head: EllipseParams,
    pub body: EllipseParams,
    /// Inner edge of the dorsal and anal fins; the body ellipse is kept inside it.
    pub fin_envelope: EllipseParams,
    pub tail_circle: Circle,
}

/// Largest `s <= 1` such that scaling `inner` about its center by `s` keeps it inside `outer`.
fn containment_scale(inner: &EllipseParams, outer: &EllipseParams) -> Option<f64> {
    if !outer.contains(inner.center) {
        return None;
    }
    let (si, ci) = inner.axis_angle_deg.to_radians().sin_cos();
    let (so, co) = outer.axis_angle_deg.to_radians().sin_cos();
    let to_outer = |dx: f64, dy: f64| ((dx * co + dy * so) / outer.semi_major, (-dx * so + dy * co) / outer.semi_minor);
    let (dx, dy) = to_outer(inner.center.x - outer.center.x, inner.center.y - outer.center.y);
    let gamma = dx * dx + dy * dy;
    let mut scale = 1.0f64;
    for k in 0..720 {
        let t = (k as f64 * 0.5).to_radians();
        let a = inner.semi_major * t.cos();
        let b = inner.semi_minor * t.sin();
        let (wx, wy) = to_outer(a * ci - b * si, a * si + b * ci);
        let alpha = wx * wx + wy * wy;
        let beta = dx * wx + dy * wy;
        let s = (-beta + (beta * beta - alpha * (gamma - 1.0)).sqrt()) / alpha;
        scale = scale.min(s);
    }
    Some(scale)
}

/// Root-mean-square offsets of `points` from `center`, along and across `angle_deg`.
fn spread(points: &[Point], center: Point, angle_deg: f64) -> (f64, f64) {
    let (s, c) = angle_deg.to_radians().sin_cos();
    let (mut sa, mut sc) = (0.0, 0.0);
    for p in points {
        let dx = p.x - center.x;
        let dy = p.y - center.y;
        sa += (dx * c + dy * s).powi(2);
        sc += (-dx * s + dy * c).powi(2);
    }
    let n = points.len() as f64;
    ((sa / n).sqrt(), (sc / n).sqrt())
}

/// Fits the head, body and fin-envelope ellipses and the tail circle.
///
/// * head: centered on the head chord midpoint, one axis the head chord, the
///   other the tail length;
/// * fin envelope: half-height is half the tallest chord between snout and
///   tail center minus a fin band of `fin_band_ratio` tail thicknesses. The
///   flatfish envelope is centered on the body column and reaches the nearer
///   of snout and tail center; the fusiform one spans the mean-point chord;
/// * body: centered on the trunk core (columns at least half as tall as the
///   tallest), two standard deviations of the trunk pixels (snout to tail
///   center) on each axis, clipped into the envelope;
/// * tail circle: `tail_circle_ratio` tail thicknesses around the tail center.
///
/// The flatfish profile keeps every ellipse level. The fusiform profile turns
/// the axes onto the line through the head and tail mean-points and centers
/// the body between them.
pub fn fit_part_regions(
    mask: &BinaryMask,
    fps: &FeaturePointSet,
    profile_kind: BodyProfile,
    config: &PartConfig,
) -> Result<PartRegions> {
    let length = fps.tail_length;
    let thickness = fps.tail_thickness;
    let chord = fps.head_low.y - fps.head_up.y;
    if !(length > 0.0) || !(thickness > 0.0) || !(chord > 0.0) {
        return Err(Error::Geometry(format!(
            "tail length {length:.3}, tail thickness {thickness:.3}, head chord {chord:.3}"
        )));
    }

    let (lo, hi) = if fps.snout_x <= fps.tail_center.x {
        (fps.snout_x, fps.tail_center.x)
    } else {
        (fps.tail_center.x, fps.snout_x)
    };
    let trunk: Vec<Point> = mask
        .foreground()
        .map(|(x, y)| Point::new(x as f64, y as f64))
        .filter(|p| p.x >= lo && p.x <= hi)
        .collect();
    if trunk.is_empty() {
        return Err(Error::Geometry("no trunk pixels between snout and tail".into()));
    }

    // tallest column chord in the trunk span
    let mut chords: std::collections::BTreeMap<u32, (u32, u32)> = std::collections::BTreeMap::new();
    for p in &trunk {
        let e = chords.entry(p.x as u32).or_insert((p.y as u32, p.y as u32));
        e.0 = e.0.min(p.y as u32);
        e.1 = e.1.max(p.y as u32);
    }
    let (_, &(tall_top, tall_bottom)) = chords
        .iter()
        .max_by(|a, b| (a.1 .1 - a.1 .0).cmp(&(b.1 .1 - b.1 .0)).then(b.0.cmp(a.0)))
        .expect("trunk is nonempty");
    // outer pixel edges, like the outline
    let tall_half = (tall_bottom - tall_top + 1) as f64 / 2.0;
    let fin_band = config.fin_band_ratio * thickness;

    let (axis_deg, env_center, env_along, env_across, body_center) = match profile_kind {
        BodyProfile::Flatfish => {
            // centroid of the trunk core, so the peduncle does not drag it tailward
            let core: Vec<&Point> = trunk
                .iter()
                .filter(|p| {
                    let (t, b) = chords[&(p.x as u32)];
                    (b - t + 1) as f64 >= tall_half
                })
                .collect();
            let n = core.len() as f64;
            let centroid = Point::new(
                core.iter().map(|p| p.x).sum::<f64>() / n,
                core.iter().map(|p| p.y).sum::<f64>() / n,
            );
            let env_center = Point::new(centroid.x, (tall_top + tall_bottom) as f64 / 2.0);
            let reach = (centroid.x - lo).min(hi - centroid.x);
            (0.0, env_center, reach, tall_half - fin_band, centroid)
        }
        BodyProfile::Fusiform => {
            let d = Point::new(
                fps.tail_center.x - fps.head_center.x,
                fps.tail_center.y - fps.head_center.y,
            );
            let axis = fold_axis_angle(d.y.atan2(d.x).to_degrees());
            let mid = fps.head_center.midpoint(fps.tail_center);
            let along = fps.head_center.distance(fps.tail_center) / 2.0 + config.head_offset * length;
            let across = tall_half * axis.to_radians().cos() - fin_band;
            (axis, mid, along, across, mid)
        }
    };
    let fin_envelope = EllipseParams::from_axes(env_center, axis_deg, env_along, env_across);
    fin_envelope.validate("fin envelope")?;

    let (s_along, s_across) = spread(&trunk, body_center, axis_deg);
    let (s, c) = axis_deg.to_radians().sin_cos();
    let dx = body_center.x - env_center.x;
    let dy = body_center.y - env_center.y;
    let off_along = (dx * c + dy * s).abs();
    let off_across = (-dx * s + dy * c).abs();
    let along = (2.0 * s_along).min(env_along - off_along);
    let across = (2.0 * s_across).min(env_across - off_across);
    if !(along > 0.0 && across > 0.0) {
        return Err(Error::Geometry(format!("body axes {along:.3} / {across:.3}")));
    }
    let mut body = EllipseParams::from_axes(body_center, axis_deg, along, across);
    let scale = containment_scale(&body, &fin_envelope)
        .ok_or_else(|| Error::Geometry("body center outside the fin envelope".into()))?;
    body.semi_major *= scale;
    body.semi_minor *= scale;
    body.validate("body")?;

    let head = EllipseParams::from_axes(fps.head_center, axis_deg, length / 2.0, chord / 2.0);
    head.validate("head")?;

    let tail_circle = Circle {
        center: fps.tail_center,
        radius: config.tail_circle_ratio * thickness,
    };
    if !(tail_circle.radius > 0.0) {
        return Err(Error::Geometry(format!("tail circle radius {}", tail_circle.radius)));
    }

    Ok(PartRegions {
        head,
        body,
        fin_envelope,
        tail_circle,
    })
}
