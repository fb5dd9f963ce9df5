//! Plane geometry shared by every stage: points and center-form boxes.
//!
//! Pixel `(x, y)` has its center at integer coordinates and covers
//! `[x - 0.5, x + 0.5] x [y - 0.5, y + 0.5]`; `y` grows downward.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new((self.x + other.x) / 2.0, (self.y + other.y) / 2.0)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned box in center/size form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        BoundingBox { cx, cy, w, h }
    }

    /// Box covering the inclusive pixel range `[x0, x1] x [y0, y1]`.
    pub fn from_pixel_extents(x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        let (x0, y0, x1, y1) = (x0 as f64, y0 as f64, x1 as f64, y1 as f64);
        BoundingBox {
            cx: (x0 + x1) / 2.0,
            cy: (y0 + y1) / 2.0,
            w: x1 - x0 + 1.0,
            h: y1 - y0 + 1.0,
        }
    }

    /// Box from its continuous corner coordinates.
    pub fn from_corners(left: f64, top: f64, right: f64, bottom: f64) -> Self {
        BoundingBox {
            cx: (left + right) / 2.0,
            cy: (top + bottom) / 2.0,
            w: right - left,
            h: bottom - top,
        }
    }

    pub fn left(&self) -> f64 {
        self.cx - self.w / 2.0
    }

    pub fn right(&self) -> f64 {
        self.cx + self.w / 2.0
    }

    pub fn top(&self) -> f64 {
        self.cy - self.h / 2.0
    }

    pub fn bottom(&self) -> f64 {
        self.cy + self.h / 2.0
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center(&self) -> Point {
        Point::new(self.cx, self.cy)
    }

    pub fn is_valid(&self) -> bool {
        self.w > 0.0 && self.h > 0.0 && self.cx.is_finite() && self.cy.is_finite()
    }

    pub fn intersection_area(&self, other: &BoundingBox) -> f64 {
        let iw = self.right().min(other.right()) - self.left().max(other.left());
        let ih = self.bottom().min(other.bottom()) - self.top().max(other.top());
        if iw <= 0.0 || ih <= 0.0 {
            0.0
        } else {
            iw * ih
        }
    }

    /// Inclusive range of pixels whose centers fall in `[left, right) x [top, bottom)`,
    /// clipped to a `width x height` raster. `None` when nothing remains.
    pub fn pixel_range(&self, width: u32, height: u32) -> Option<(u32, u32, u32, u32)> {
        let x0 = self.left().ceil().max(0.0);
        let y0 = self.top().ceil().max(0.0);
        let x1 = (self.right().ceil() - 1.0).min(width as f64 - 1.0);
        let y1 = (self.bottom().ceil() - 1.0).min(height as f64 - 1.0);
        if x1 < x0 || y1 < y0 {
            return None;
        }
        Some((x0 as u32, y0 as u32, x1 as u32, y1 as u32))
    }

    pub fn contains_pixel(&self, x: u32, y: u32) -> bool {
        let (x, y) = (x as f64, y as f64);
        x >= self.left() && x < self.right() && y >= self.top() && y < self.bottom()
    }
}
