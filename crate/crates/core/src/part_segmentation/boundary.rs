use serde::{Deserialize, Serialize};

use super::PartConfig;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::raster::BinaryMask;

/// Column-wise outline of an aligned fish.
///
/// `upper[i]` and `lower[i]` describe column `x_left + i`: the outer edges of
/// its topmost and bottommost foreground pixels (row -/+ 0.5), after smoothing.
/// `raw_upper` / `raw_lower` hold the same edges before smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProfile {
    pub x_left: u32,
    pub upper: Vec<Point>,
    pub lower: Vec<Point>,
    pub raw_upper: Vec<f64>,
    pub raw_lower: Vec<f64>,
}

impl BoundaryProfile {
    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }

    pub fn x_right(&self) -> u32 {
        self.x_left + self.len() as u32 - 1
    }

    fn interpolate(samples: &[Point], x_left: u32, x: f64) -> Option<f64> {
        let t = x - x_left as f64;
        if !(t >= 0.0 && t <= (samples.len() - 1) as f64) {
            return None;
        }
        let i = t.floor() as usize;
        let f = t - i as f64;
        if i + 1 >= samples.len() {
            return Some(samples[i].y);
        }
        Some(samples[i].y * (1.0 - f) + samples[i + 1].y * f)
    }

    /// Upper outline at a fractional column.
    pub fn upper_at(&self, x: f64) -> Option<f64> {
        Self::interpolate(&self.upper, self.x_left, x)
    }

    pub fn lower_at(&self, x: f64) -> Option<f64> {
        Self::interpolate(&self.lower, self.x_left, x)
    }
}

fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let span = &values[lo..=hi];
            span.iter().sum::<f64>() / span.len() as f64
        })
        .collect()
}

/// Smoothed upper and lower outline of the foreground.
///
/// Empty columns inside the horizontal extent are bridged linearly when the
/// run is at most `gap_tolerance` wide; wider runs mean the mask is not one piece.
pub fn extract_boundary(mask: &BinaryMask, config: &PartConfig) -> Result<BoundaryProfile> {
    let (x0, _, x1, _) = mask.extents().ok_or(Error::EmptyMask)?;
    let n = (x1 - x0 + 1) as usize;
    let mut top: Vec<Option<f64>> = vec![None; n];
    let mut bottom: Vec<Option<f64>> = vec![None; n];
    for (x, y) in mask.foreground() {
        let i = (x - x0) as usize;
        let (t, b) = (y as f64 - 0.5, y as f64 + 0.5);
        top[i] = Some(top[i].map_or(t, |v: f64| v.min(t)));
        bottom[i] = Some(bottom[i].map_or(b, |v: f64| v.max(b)));
    }

    let mut i = 0;
    while i < n {
        if top[i].is_some() {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && top[i].is_none() {
            i += 1;
        }
        let width = (i - start) as u32;
        if width > config.gap_tolerance {
            return Err(Error::FragmentedMask {
                column: x0 + start as u32,
                width,
            });
        }
        // extents guarantee foreground at both ends
        let (lt, lb) = (top[start - 1].unwrap(), bottom[start - 1].unwrap());
        let (rt, rb) = (top[i].unwrap(), bottom[i].unwrap());
        for j in start..i {
            let f = (j - start + 1) as f64 / (width + 1) as f64;
            top[j] = Some(lt + (rt - lt) * f);
            bottom[j] = Some(lb + (rb - lb) * f);
        }
    }

    let window = config.smoothing_window.max(1);
    let top: Vec<f64> = top.into_iter().map(Option::unwrap).collect();
    let bottom: Vec<f64> = bottom.into_iter().map(Option::unwrap).collect();
    let smooth_top = moving_average(&top, window);
    let smooth_bottom = moving_average(&bottom, window);
    let column = |i: usize| (x0 as usize + i) as f64;
    Ok(BoundaryProfile {
        x_left: x0,
        upper: smooth_top.iter().enumerate().map(|(i, &y)| Point::new(column(i), y)).collect(),
        lower: smooth_bottom.iter().enumerate().map(|(i, &y)| Point::new(column(i), y)).collect(),
        raw_upper: top,
        raw_lower: bottom,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_outline_is_flat() {
        let m = BinaryMask::from_fn(140, 60, |x, y| (20..120).contains(&x) && (20..40).contains(&y));
        let p = extract_boundary(&m, &PartConfig::default()).unwrap();
        assert_eq!(p.x_left, 20);
        assert_eq!(p.x_right(), 119);
        assert!(p.upper.iter().all(|q| q.y == 19.5));
        assert!(p.lower.iter().all(|q| q.y == 39.5));
    }

    #[test]
    fn half_disc_follows_the_arc() {
        let (cx, cy, r) = (100.0, 90.0, 60.0);
        let m = BinaryMask::from_fn(200, 120, |x, y| {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            y as f64 <= cy && dx * dx + dy * dy <= r * r
        });
        let p = extract_boundary(&m, &PartConfig::default()).unwrap();
        for (u, l) in p.upper.iter().zip(&p.lower) {
            let dx = u.x - cx;
            if dx.abs() > 0.8 * r {
                continue;
            }
            let arc = cy - (r * r - dx * dx).sqrt();
            assert!((u.y - arc).abs() <= 1.0, "x={} upper={} arc={}", u.x, u.y, arc);
            assert!((l.y - (cy + 0.5)).abs() <= 1e-12);
        }
    }

    #[test]
    fn interior_hole_is_ignored() {
        let solid = BinaryMask::from_fn(140, 60, |x, y| (20..120).contains(&x) && (15..45).contains(&y));
        let mut holed = solid.clone();
        for y in 25..35 {
            for x in 60..70 {
                holed.set(x, y, false);
            }
        }
        let cfg = PartConfig::default();
        assert_eq!(extract_boundary(&solid, &cfg).unwrap(), extract_boundary(&holed, &cfg).unwrap());
    }

    #[test]
    fn narrow_gap_is_bridged_wide_gap_fails() {
        let cfg = PartConfig::default();
        let narrow = BinaryMask::from_fn(100, 40, |x, y| (10..90).contains(&x) && x != 50 && (10..30).contains(&y));
        let p = extract_boundary(&narrow, &cfg).unwrap();
        assert_eq!(p.len(), 80);
        assert_eq!(p.upper_at(50.0), Some(9.5));

        let wide = BinaryMask::from_fn(100, 40, |x, y| {
            (10..90).contains(&x) && !(50..60).contains(&x) && (10..30).contains(&y)
        });
        assert!(matches!(
            extract_boundary(&wide, &cfg),
            Err(Error::FragmentedMask { column: 50, width: 10 })
        ));
    }

    #[test]
    fn fractional_lookup_interpolates() {
        let p = BoundaryProfile {
            x_left: 10,
            upper: vec![Point::new(10.0, 4.0), Point::new(11.0, 6.0)],
            lower: vec![Point::new(10.0, 8.0), Point::new(11.0, 8.0)],
            raw_upper: vec![4.0, 6.0],
            raw_lower: vec![8.0, 8.0],
        };
        assert_eq!(p.upper_at(10.5), Some(5.0));
        assert_eq!(p.upper_at(11.0), Some(6.0));
        assert_eq!(p.upper_at(11.5), None);
    }
}
