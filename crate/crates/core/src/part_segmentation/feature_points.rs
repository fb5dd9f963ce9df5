use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{BoundaryProfile, PartConfig};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mask_ops::HeadSide;

/// Caudal notches and the measurements derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoints {
    pub up: Point,
    pub low: Point,
    /// Midpoint of `up` and `low`.
    pub center: Point,
    /// Horizontal distance from `center` to the outer edge of the tail-end column.
    pub length: f64,
    /// Distance between `up` and `low`.
    pub thickness: f64,
    pub tip_x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeaturePointSet {
    pub head_side: HeadSide,
    pub tail_up: Point,
    pub tail_low: Point,
    pub tail_center: Point,
    pub tail_length: f64,
    pub tail_thickness: f64,
    pub tail_tip_x: f64,
    pub snout_x: f64,
    pub head_center: Point,
    pub head_up: Point,
    pub head_low: Point,
}

impl FeaturePointSet {
    pub fn tail(&self) -> TailPoints {
        TailPoints {
            up: self.tail_up,
            low: self.tail_low,
            center: self.tail_center,
            length: self.tail_length,
            thickness: self.tail_thickness,
            tip_x: self.tail_tip_x,
        }
    }

    /// +1 when moving from the snout toward the tail increases x.
    pub fn tailward(&self) -> f64 {
        match self.head_side {
            HeadSide::Left => 1.0,
            HeadSide::Right => -1.0,
        }
    }
}

const NOTCH_BAND: f64 = 0.005;

/// Deepest notch inside `window`, where a notch is a local maximum of `values`.
///
/// Maximal runs of equal samples are treated as one sample, so quantized
/// outlines with flat-topped notches still qualify. A run is a candidate when
/// both neighbors are strictly lower and nothing within `radius` of its ends
/// is higher; it is represented by its middle column, which must fall in
/// `window`. Depth is measured against the lower of the two side envelopes
/// (minimum over the whole profile on each side); ties go toward the tail tip.
fn deepest_notch(values: &[f64], window: Range<usize>, radius: usize, tail_at_end: bool) -> Option<usize> {
    let n = values.len();
    let mut picks: Vec<usize> = Vec::new();
    let mut start = 0;
    while start < n {
        let v = values[start];
        let mut end = start;
        while end + 1 < n && values[end + 1] == v {
            end += 1;
        }
        let lo = start.saturating_sub(radius);
        let hi = (end + radius).min(n - 1);
        let candidate = start > 0
            && end + 1 < n
            && values[start - 1] < v
            && values[end + 1] < v
            && values[lo..start].iter().all(|&u| u <= v)
            && values[end + 1..=hi].iter().all(|&u| u <= v);
        if candidate {
            let mid = if tail_at_end {
                (start + end).div_ceil(2)
            } else {
                (start + end) / 2
            };
            if window.contains(&mid) {
                picks.push(mid);
            }
        }
        start = end + 1;
    }

    let depth = |i: usize| {
        let left = values[..i].iter().copied().fold(f64::INFINITY, f64::min);
        let right = values[i + 1..].iter().copied().fold(f64::INFINITY, f64::min);
        values[i] - left.max(right)
    };
    let mut best: Option<(usize, f64)> = None;
    for i in picks {
        let d = depth(i);
        best = match best {
            None => Some((i, d)),
            Some((j, e)) => {
                let closer_to_tip = if tail_at_end { i > j } else { i < j };
                if d > e || (d == e && closer_to_tip) {
                    Some((i, d))
                } else {
                    Some((j, e))
                }
            }
        };
    }
    best.map(|(i, _)| i)
}

/// Connected stretch around `i` whose values exceed `floor`.
fn stretch_above(values: &[f64], i: usize, floor: f64) -> Range<usize> {
    let mut lo = i;
    while lo > 0 && values[lo - 1] > floor {
        lo -= 1;
    }
    let mut hi = i;
    while hi + 1 < values.len() && values[hi + 1] > floor {
        hi += 1;
    }
    lo..hi + 1
}

/// Sub-sample notch near `i`: the raw peak inside the smoothed valley, then
/// the weighted centroid of the raw stretch within `delta` of that peak.
/// Returns `(index, peak value)`.
fn refine_notch(smooth: &[f64], raw: &[f64], i: usize, delta: f64) -> (f64, f64) {
    let valley = stretch_above(smooth, i, smooth[i] - delta);
    let mut peak = i;
    for j in valley {
        let closer = j.abs_diff(i) < peak.abs_diff(i);
        if raw[j] > raw[peak] || (raw[j] == raw[peak] && closer) {
            peak = j;
        }
    }
    let floor = raw[peak] - delta;
    let (mut sum, mut weight) = (0.0, 0.0);
    for j in stretch_above(raw, peak, floor) {
        sum += (raw[j] - floor) * j as f64;
        weight += raw[j] - floor;
    }
    (sum / weight, raw[peak])
}

/// Locates the caudal notches on the tail-side part of the outline.
///
/// The upper notch is where the upper outline dips furthest toward the
/// midline (a local maximum of `y`), the lower notch the mirror case.
pub fn find_tail_points(profile: &BoundaryProfile, head_side: HeadSide, config: &PartConfig) -> Result<TailPoints> {
    let n = profile.len();
    if n < 3 {
        return Err(Error::NoTailNotch { boundary: "upper" });
    }
    let span = ((config.tail_search_fraction * n as f64).ceil() as usize).clamp(1, n);
    let tail_at_end = head_side == HeadSide::Left;
    let window = if tail_at_end { n - span..n } else { 0..span };

    let upper: Vec<f64> = profile.upper.iter().map(|p| p.y).collect();
    let lower: Vec<f64> = profile.lower.iter().map(|p| -p.y).collect();
    let iu = deepest_notch(&upper, window.clone(), config.extremum_radius, tail_at_end)
        .ok_or(Error::NoTailNotch { boundary: "upper" })?;
    let il = deepest_notch(&lower, window, config.extremum_radius, tail_at_end)
        .ok_or(Error::NoTailNotch { boundary: "lower" })?;

    // Smoothing only steers detection. The fixed window smears a notch by an
    // amount that depends on the pixel scale, so position and depth come from
    // the raw edges around the detected column.
    let delta = NOTCH_BAND * n as f64;
    let x_left = profile.x_left as f64;
    let raw_upper = profile.raw_upper.clone();
    let raw_lower: Vec<f64> = profile.raw_lower.iter().map(|y| -y).collect();
    let (ux, uy) = refine_notch(&upper, &raw_upper, iu, delta);
    let (lx, ly) = refine_notch(&lower, &raw_lower, il, delta);
    let up = Point::new(x_left + ux, uy);
    let low = Point::new(x_left + lx, -ly);
    let center = up.midpoint(low);
    let tip_x = if tail_at_end {
        profile.x_right() as f64 + 0.5
    } else {
        profile.x_left as f64 - 0.5
    };
    Ok(TailPoints {
        up,
        low,
        center,
        length: (tip_x - center.x).abs(),
        thickness: up.distance(low),
        tip_x,
    })
}

/// Tail points plus the head chord.
///
/// The head center sits `head_offset * tail_length` in from the snout, at the
/// middle of the vertical chord of the outline there.
pub fn find_feature_points(profile: &BoundaryProfile, head_side: HeadSide, config: &PartConfig) -> Result<FeaturePointSet> {
    let tail = find_tail_points(profile, head_side, config)?;
    if tail.length <= 0.0 {
        return Err(Error::Geometry(format!("tail length {}", tail.length)));
    }
    let (snout_x, inward) = match head_side {
        HeadSide::Left => (profile.x_left as f64 - 0.5, 1.0),
        HeadSide::Right => (profile.x_right() as f64 + 0.5, -1.0),
    };
    let head_x = snout_x + inward * config.head_offset * tail.length;
    let (top, bottom) = profile
        .upper_at(head_x)
        .zip(profile.lower_at(head_x))
        .ok_or_else(|| Error::Geometry(format!("head center x={head_x:.1} outside the outline")))?;
    let head_up = Point::new(head_x, top);
    let head_low = Point::new(head_x, bottom);
    Ok(FeaturePointSet {
        head_side,
        tail_up: tail.up,
        tail_low: tail.low,
        tail_center: tail.center,
        tail_length: tail.length,
        tail_thickness: tail.thickness,
        tail_tip_x: tail.tip_x,
        snout_x,
        head_center: head_up.midpoint(head_low),
        head_up,
        head_low,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::part_segmentation::extract_boundary;
    use crate::raster::BinaryMask;

    #[test]
    fn notch_picks_deepest_valley() {
        // two bumps, the deeper one at index 14
        let v: Vec<f64> = (0..20)
            .map(|i| match i {
                5 => 3.0,
                14 => 6.0,
                _ => 0.0,
            })
            .collect();
        assert_eq!(deepest_notch(&v, 0..20, 2, true), Some(14));
        assert_eq!(deepest_notch(&v, 0..10, 2, true), Some(5));
    }

    #[test]
    fn plateau_collapses_to_its_middle() {
        let v = vec![0.0, 1.0, 2.0, 2.0, 2.0, 1.0, 0.0];
        assert_eq!(deepest_notch(&v, 0..7, 3, true), Some(3));
        let mut wide = vec![0.0; 5];
        wide.extend(std::iter::repeat(4.0).take(21));
        wide.extend([0.0; 5]);
        assert_eq!(deepest_notch(&wide, 0..31, 5, true), Some(15));
        let even = vec![0.0, 1.0, 2.0, 2.0, 1.0, 0.0];
        assert_eq!(deepest_notch(&even, 0..6, 3, true), Some(3));
        assert_eq!(deepest_notch(&even, 0..6, 3, false), Some(2));
    }

    #[test]
    fn refinement_finds_a_symmetric_vertex_between_samples() {
        // vertex at 10.5
        let raw: Vec<f64> = (0..22).map(|i| -((i as f64 - 10.5).powi(2) / 4.0).floor()).collect();
        let (x, peak) = refine_notch(&raw, &raw, 10, 3.0);
        assert!((x - 10.5).abs() < 1e-12, "{x}");
        assert_eq!(peak, 0.0);
    }

    #[test]
    fn monotone_has_no_notch() {
        let v: Vec<f64> = (0..30).map(|i| i as f64).collect();
        assert_eq!(deepest_notch(&v, 0..30, 5, true), None);
    }

    #[test]
    fn rectangle_has_no_tail_notch() {
        let m = BinaryMask::from_fn(140, 60, |x, y| (20..120).contains(&x) && (20..40).contains(&y));
        let cfg = PartConfig::default();
        let p = extract_boundary(&m, &cfg).unwrap();
        assert!(matches!(
            find_tail_points(&p, HeadSide::Left, &cfg),
            Err(Error::NoTailNotch { .. })
        ));
    }

    #[test]
    fn tail_center_is_exact_midpoint() {
        // body block, narrow stalk, flared tail
        let half = |x: u32| -> f64 {
            match x {
                10..=89 => 20.0,
                90..=119 => 4.0 + ((x as f64 - 119.0).powi(2)) * 0.01,
                120..=150 => 4.0 + ((x as f64 - 119.0).powi(2)) * 0.015,
                _ => -1.0,
            }
        };
        let m = BinaryMask::from_fn(170, 80, |x, y| (y as f64 - 40.0).abs() <= half(x));
        let cfg = PartConfig::default();
        let p = extract_boundary(&m, &cfg).unwrap();
        let t = find_tail_points(&p, HeadSide::Left, &cfg).unwrap();
        assert_eq!(t.center.x, (t.up.x + t.low.x) / 2.0);
        assert_eq!(t.center.y, (t.up.y + t.low.y) / 2.0);
        assert!((t.up.x - 119.0).abs() <= 3.0, "{:?}", t.up);
        assert_eq!(t.tip_x, 150.5);
        assert_eq!(t.length, 150.5 - t.center.x);
    }
}
