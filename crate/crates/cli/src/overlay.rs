//! Inspection overlays: tinted part labels with the fitted shapes and feature points.

use flatpart::part_segmentation::{EllipseParams, PartLabel, PartSegmentation};
use flatpart::raster::ColorImage;
use flatpart::Point;
use image::Rgb;
use imageproc::drawing::{draw_cross_mut, draw_hollow_circle_mut, draw_line_segment_mut};

const HEAD: Rgb<u8> = Rgb([230, 60, 60]);
const FINS: Rgb<u8> = Rgb([60, 200, 80]);
const BODY: Rgb<u8> = Rgb([70, 110, 235]);
const POINT: Rgb<u8> = Rgb([255, 255, 0]);
const TINT: f32 = 0.4;

fn part_color(label: PartLabel) -> Option<Rgb<u8>> {
    match label {
        PartLabel::Background => None,
        PartLabel::Head => Some(HEAD),
        PartLabel::Fins => Some(FINS),
        PartLabel::Body => Some(BODY),
    }
}

fn draw_ellipse(image: &mut ColorImage, e: &EllipseParams, color: Rgb<u8>) {
    let (s, c) = e.axis_angle_deg.to_radians().sin_cos();
    let at = |k: usize| {
        let t = (k as f64).to_radians() * 2.0;
        let (a, b) = (e.semi_major * t.cos(), e.semi_minor * t.sin());
        ((e.center.x + a * c - b * s) as f32, (e.center.y + a * s + b * c) as f32)
    };
    for k in 0..180 {
        draw_line_segment_mut(image, at(k), at(k + 1), color);
    }
}

fn mark(image: &mut ColorImage, p: Point) {
    draw_cross_mut(image, POINT, p.x.round() as i32, p.y.round() as i32);
}

pub fn draw_overlay(base: &ColorImage, seg: &PartSegmentation) -> ColorImage {
    let mut out = base.clone();
    for (x, y, px) in out.enumerate_pixels_mut() {
        if let Some(tint) = part_color(seg.labels.get(x, y)) {
            for c in 0..3 {
                px.0[c] = (px.0[c] as f32 * (1.0 - TINT) + tint.0[c] as f32 * TINT).round() as u8;
            }
        }
    }
    let r = &seg.regions;
    draw_ellipse(&mut out, &r.head, HEAD);
    draw_ellipse(&mut out, &r.body, BODY);
    draw_ellipse(&mut out, &r.fin_envelope, FINS);
    let c = r.tail_circle;
    draw_hollow_circle_mut(&mut out, (c.center.x.round() as i32, c.center.y.round() as i32), c.radius.round() as i32, FINS);
    let p = &seg.points;
    for q in [p.tail_up, p.tail_low, p.tail_center, p.head_up, p.head_low, p.head_center] {
        mark(&mut out, q);
    }
    out
}
