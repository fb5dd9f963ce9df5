//! Procedural fish silhouettes and disease patches with known construction geometry.
//!
//! A fish is described column by column in its own frame: `u` runs along the
//! body with the snout at negative `u`, `v` points down, the body center is
//! the origin. Each column is a single vertical interval, which keeps the
//! outline and every chord analytic.

use std::f64::consts::TAU;

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::mask_ops::HeadSide;
use crate::part_segmentation::{BodyProfile, EllipseParams, PartLabel, PartLabelMap};
use crate::raster::BinaryMask;

/// Flounder-like outline: a fin-fringed ellipse, a tapering caudal peduncle
/// and a flared caudal fin. The peduncle is narrowest at `a + stalk_len`; the
/// outline is a parabola of the same curvature on both sides of that column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatfishParams {
    /// Body semi-axes.
    pub a: f64,
    pub b: f64,
    /// Dorsal/anal fin width added to `b` at mid-body.
    pub fin: f64,
    pub notch_half: f64,
    pub stalk_len: f64,
    pub stalk_curvature: f64,
    pub caudal_len: f64,
    pub caudal_half: f64,
}

/// Salmon-like outline: asymmetric back and belly, a small dorsal fin and a
/// tail set `tail_dy` below the body axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusiformParams {
    pub a: f64,
    pub b_up: f64,
    pub b_low: f64,
    pub tail_dy: f64,
    pub notch_half: f64,
    pub stalk_len: f64,
    pub stalk_curvature: f64,
    pub caudal_len: f64,
    pub caudal_half: f64,
    /// Dorsal fin span along `u` and height.
    pub dorsal: (f64, f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FishModel {
    Flatfish(FlatfishParams),
    Fusiform(FusiformParams),
}

/// Peduncle half-height: a parabola around the notch, capped where it meets the body.
fn stalk_half(notch_half: f64, curvature: f64, notch_u: f64, u: f64, cap: f64) -> f64 {
    (notch_half + curvature * (notch_u - u).powi(2)).min(cap)
}

/// `sqrt(1 - 0.9^2)`: body half-height fraction where the peduncle starts.
const JOIN: f64 = 0.435_889_894_354_067_4;

impl FlatfishParams {
    pub fn random(rng: &mut impl Rng) -> Self {
        let a: f64 = rng.random_range(120.0..170.0);
        let b = a * rng.random_range(0.38..0.48);
        let notch_half: f64 = rng.random_range(8.0..13.0);
        let fin = notch_half;
        let stalk_len: f64 = rng.random_range(20.0..30.0);
        let caudal_len = rng.random_range(30.0..45.0);
        let stalk_curvature = rng.random_range(0.008..0.014);
        let caudal_half = notch_half + stalk_curvature * caudal_len * caudal_len;
        FlatfishParams {
            a,
            b,
            fin,
            notch_half,
            stalk_len,
            stalk_curvature,
            caudal_len,
            caudal_half,
        }
    }
}

impl FusiformParams {
    pub fn random(rng: &mut impl Rng) -> Self {
        let a: f64 = rng.random_range(140.0..180.0);
        let b_up = a * rng.random_range(0.20..0.25);
        let b_low = a * rng.random_range(0.24..0.30);
        let tail_dy = 0.25 * (b_low - b_up);
        let notch_half: f64 = rng.random_range(6.0..9.0);
        let stalk_len: f64 = rng.random_range(20.0..30.0);
        let caudal_len = rng.random_range(30.0..42.0);
        let stalk_curvature = rng.random_range(0.008..0.014);
        let caudal_half = notch_half + stalk_curvature * caudal_len * caudal_len;
        let d0 = -0.25 * a;
        let dorsal = (d0, d0 + rng.random_range(0.25..0.35) * a, rng.random_range(8.0..14.0));
        FusiformParams {
            a,
            b_up,
            b_low,
            tail_dy,
            notch_half,
            stalk_len,
            stalk_curvature,
            caudal_len,
            caudal_half,
            dorsal,
        }
    }
}

impl FishModel {
    pub fn random(profile: BodyProfile, rng: &mut impl Rng) -> Self {
        match profile {
            BodyProfile::Flatfish => FishModel::Flatfish(FlatfishParams::random(rng)),
            BodyProfile::Fusiform => FishModel::Fusiform(FusiformParams::random(rng)),
        }
    }

    pub fn profile(&self) -> BodyProfile {
        match self {
            FishModel::Flatfish(_) => BodyProfile::Flatfish,
            FishModel::Fusiform(_) => BodyProfile::Fusiform,
        }
    }

    /// `u` of the narrowest peduncle column.
    pub fn notch_u(&self) -> f64 {
        match self {
            FishModel::Flatfish(p) => p.a + p.stalk_len,
            FishModel::Fusiform(p) => p.a + p.stalk_len,
        }
    }

    pub fn tail_tip_u(&self) -> f64 {
        match self {
            FishModel::Flatfish(p) => self.notch_u() + p.caudal_len,
            FishModel::Fusiform(p) => self.notch_u() + p.caudal_len,
        }
    }

    pub fn snout_u(&self) -> f64 {
        match self {
            FishModel::Flatfish(p) => -p.a,
            FishModel::Fusiform(p) => -p.a,
        }
    }

    /// Vertical half-extent bound of the silhouette.
    fn v_bound(&self) -> f64 {
        match self {
            FishModel::Flatfish(p) => p.b + p.fin,
            FishModel::Fusiform(p) => p.b_up.max(p.b_low) + p.dorsal.2 + p.tail_dy.abs() + p.caudal_half,
        }
    }

    /// Vertical interval `(top, bottom)` of column `u`, if the column is occupied.
    pub fn column(&self, u: f64) -> Option<(f64, f64)> {
        match *self {
            FishModel::Flatfish(p) => {
                let notch = p.a + p.stalk_len;
                let mut half: Option<f64> = None;
                if u.abs() <= p.a {
                    half = Some((p.b + p.fin) * (1.0 - (u / p.a).powi(2)).max(0.0).sqrt());
                }
                if u >= 0.9 * p.a && u <= notch {
                    let cap = JOIN * (p.b + p.fin);
                    let h = stalk_half(p.notch_half, p.stalk_curvature, notch, u, cap);
                    half = Some(half.map_or(h, |e| e.max(h)));
                }
                if u >= notch && u <= notch + p.caudal_len {
                    let h = p.notch_half + p.stalk_curvature * (u - notch).powi(2);
                    half = Some(half.map_or(h, |e| e.max(h)));
                }
                half.map(|h| (-h, h))
            }
            FishModel::Fusiform(p) => {
                let notch = p.a + p.stalk_len;
                let mut iv: Option<(f64, f64)> = None;
                let mut merge = |t: f64, b: f64| {
                    iv = Some(iv.map_or((t, b), |(t0, b0)| (t0.min(t), b0.max(b))));
                };
                if u.abs() <= p.a {
                    let r = (1.0 - (u / p.a).powi(2)).max(0.0).sqrt();
                    let mut top = -p.b_up * r;
                    let (d0, d1, dh) = p.dorsal;
                    if u >= d0 && u <= d1 {
                        let mid = (d0 + d1) / 2.0;
                        top -= dh * (1.0 - (u - mid).abs() / ((d1 - d0) / 2.0));
                    }
                    merge(top, p.b_low * r);
                }
                if u >= 0.9 * p.a && u <= notch {
                    let cap = (JOIN * p.b_up + p.tail_dy).min(JOIN * p.b_low - p.tail_dy);
                    let h = stalk_half(p.notch_half, p.stalk_curvature, notch, u, cap);
                    merge(p.tail_dy - h, p.tail_dy + h);
                }
                if u >= notch && u <= notch + p.caudal_len {
                    let h = p.notch_half + p.stalk_curvature * (u - notch).powi(2);
                    merge(p.tail_dy - h, p.tail_dy + h);
                }
                iv
            }
        }
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        self.column(u).is_some_and(|(t, b)| v >= t && v <= b)
    }

    /// Copy with every length multiplied by `s`.
    pub fn scaled(&self, s: f64) -> FishModel {
        match *self {
            FishModel::Flatfish(p) => FishModel::Flatfish(FlatfishParams {
                a: p.a * s,
                b: p.b * s,
                fin: p.fin * s,
                notch_half: p.notch_half * s,
                stalk_len: p.stalk_len * s,
                stalk_curvature: p.stalk_curvature / s,
                caudal_len: p.caudal_len * s,
                caudal_half: p.caudal_half * s,
            }),
            FishModel::Fusiform(p) => FishModel::Fusiform(FusiformParams {
                a: p.a * s,
                b_up: p.b_up * s,
                b_low: p.b_low * s,
                tail_dy: p.tail_dy * s,
                notch_half: p.notch_half * s,
                stalk_len: p.stalk_len * s,
                stalk_curvature: p.stalk_curvature / s,
                caudal_len: p.caudal_len * s,
                caudal_half: p.caudal_half * s,
                dorsal: (p.dorsal.0 * s, p.dorsal.1 * s, p.dorsal.2 * s),
            }),
        }
    }
}

/// Construction geometry of a rendered fish, in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub profile: BodyProfile,
    pub head_side: HeadSide,
    pub rotation_deg: f64,
    /// Origin of the fish frame.
    pub center: Point,
    pub tail_up: Point,
    pub tail_low: Point,
    /// Tail mean-point.
    pub tail_center: Point,
    pub tail_tip: Point,
    pub snout: Point,
    pub tail_length: f64,
    pub head_up: Point,
    pub head_low: Point,
    /// Head mean-point.
    pub head_center: Point,
    pub head: EllipseParams,
    /// Body ellipse of the construction (flatfish only).
    pub body: Option<EllipseParams>,
}

#[derive(Debug, Clone)]
pub struct SynthFish {
    pub model: FishModel,
    pub mask: BinaryMask,
    pub image: RgbImage,
    pub truth: SynthTruth,
}

/// Maps between the fish frame and image coordinates.
#[derive(Debug, Clone, Copy)]
struct Placement {
    center: Point,
    sin: f64,
    cos: f64,
    /// +1 when the head is on the left before rotation.
    flip: f64,
}

impl Placement {
    fn to_image(&self, u: f64, v: f64) -> Point {
        let x = self.flip * u;
        Point::new(
            self.center.x + self.cos * x - self.sin * v,
            self.center.y + self.sin * x + self.cos * v,
        )
    }

    fn to_fish(&self, p: Point) -> (f64, f64) {
        let dx = p.x - self.center.x;
        let dy = p.y - self.center.y;
        let x = self.cos * dx + self.sin * dy;
        let v = -self.sin * dx + self.cos * dy;
        (self.flip * x, v)
    }
}

/// Stable pseudo-texture: smooth stripes plus per-pixel grain.
fn textured(base: [f64; 3], amplitude: f64, phase: (f64, f64), x: f64, y: f64, grain: f64) -> Rgb<u8> {
    let t = (0.11 * x + phase.0).sin() * (0.07 * y + phase.1).cos();
    Rgb(base.map(|c| (c + amplitude * t + grain).round().clamp(0.0, 255.0) as u8))
}

/// Renders `model` on a canvas sized to fit, rotated by `rotation_deg`.
pub fn render_fish(model: &FishModel, head_side: HeadSide, rotation_deg: f64, rng: &mut impl Rng) -> SynthFish {
    let margin = 16.0;
    let (sin, cos) = rotation_deg.to_radians().sin_cos();
    let flip = if head_side == HeadSide::Left { 1.0 } else { -1.0 };
    let probe = Placement {
        center: Point::new(0.0, 0.0),
        sin,
        cos,
        flip,
    };
    let (u0, u1, vb) = (model.snout_u(), model.tail_tip_u(), model.v_bound());
    let corners = [(u0, -vb), (u0, vb), (u1, -vb), (u1, vb)].map(|(u, v)| probe.to_image(u, v));
    let min_x = corners.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let max_x = corners.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let min_y = corners.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let max_y = corners.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    let width = (max_x - min_x + 2.0 * margin).ceil() as u32;
    let height = (max_y - min_y + 2.0 * margin).ceil() as u32;
    let place = Placement {
        center: Point::new((margin - min_x).round(), (margin - min_y).round()),
        ..probe
    };

    let mask = BinaryMask::from_fn(width, height, |x, y| {
        let (u, v) = place.to_fish(Point::new(x as f64, y as f64));
        model.contains(u, v)
    });

    let fish_base = [
        rng.random_range(110.0..160.0),
        rng.random_range(80.0..120.0),
        rng.random_range(45.0..80.0),
    ];
    let bg_base = [
        rng.random_range(20.0..50.0),
        rng.random_range(60.0..100.0),
        rng.random_range(150.0..200.0),
    ];
    let phase = (rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
    let mut image = RgbImage::new(width, height);
    for y in 0..height {
        for x in 0..width {
            let grain = rng.random_range(-3.0..3.0);
            let px = if mask.get(x, y) {
                textured(fish_base, 14.0, phase, x as f64, y as f64, grain)
            } else {
                textured(bg_base, 4.0, phase, x as f64, y as f64, grain)
            };
            image.put_pixel(x, y, px);
        }
    }

    let truth = construction_truth(model, head_side, rotation_deg, &place);
    SynthFish {
        model: *model,
        mask,
        image,
        truth,
    }
}

fn construction_truth(model: &FishModel, head_side: HeadSide, rotation_deg: f64, place: &Placement) -> SynthTruth {
    let notch = model.notch_u();
    let (tail_dy, notch_half) = match model {
        FishModel::Flatfish(p) => (0.0, p.notch_half),
        FishModel::Fusiform(p) => (p.tail_dy, p.notch_half),
    };
    let tail_length = model.tail_tip_u() - notch;
    let head_u = model.snout_u() + 0.5 * tail_length;
    let (ht, hb) = model.column(head_u).expect("head column lies on the body");
    let head_center_fish = (head_u, (ht + hb) / 2.0);
    let angle = rotation_deg;
    let head = EllipseParams::from_axes(
        place.to_image(head_center_fish.0, head_center_fish.1),
        angle,
        tail_length / 2.0,
        (hb - ht) / 2.0,
    );
    let body = match model {
        FishModel::Flatfish(p) => Some(EllipseParams::from_axes(place.to_image(0.0, 0.0), angle, p.a, p.b)),
        FishModel::Fusiform(_) => None,
    };
    SynthTruth {
        profile: model.profile(),
        head_side,
        rotation_deg,
        center: place.center,
        tail_up: place.to_image(notch, tail_dy - notch_half),
        tail_low: place.to_image(notch, tail_dy + notch_half),
        tail_center: place.to_image(notch, tail_dy),
        tail_tip: place.to_image(model.tail_tip_u(), tail_dy),
        snout: place.to_image(model.snout_u(), 0.0),
        tail_length,
        head_up: place.to_image(head_u, ht),
        head_low: place.to_image(head_u, hb),
        head_center: place.to_image(head_center_fish.0, head_center_fish.1),
        head,
        body,
    }
}

impl SynthFish {
    /// Labels from the construction ellipses, with the same priority rule as the fitter.
    /// `None` for profiles without a construction body ellipse.
    pub fn construction_labels(&self) -> Option<PartLabelMap> {
        let body = self.truth.body?;
        let head = self.truth.head;
        let mut indexed = image::GrayImage::new(self.mask.width(), self.mask.height());
        for (x, y) in self.mask.foreground() {
            let p = Point::new(x as f64, y as f64);
            let label = if head.contains(p) {
                PartLabel::Head
            } else if body.contains(p) {
                PartLabel::Body
            } else {
                PartLabel::Fins
            };
            indexed.put_pixel(x, y, image::Luma([label as u8]));
        }
        PartLabelMap::from_indexed(&indexed).ok()
    }
}

/// One random fish from a seed.
pub fn generate_fish(seed: u64, profile: BodyProfile, head_side: HeadSide, rotation_deg: f64) -> SynthFish {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = FishModel::random(profile, &mut rng);
    render_fish(&model, head_side, rotation_deg, &mut rng)
}

/// A square disease patch: an irregular lesion blob on a healthy margin.
pub fn generate_patch(rng: &mut impl Rng) -> (RgbImage, BinaryMask) {
    let size = rng.random_range(24u32..=40);
    let c = (size as f64 - 1.0) / 2.0;
    let r0 = size as f64 * rng.random_range(0.30..0.40);
    let (k, phase, wobble) = (
        rng.random_range(2u32..=4) as f64,
        rng.random_range(0.0..TAU),
        rng.random_range(0.05..0.15),
    );
    let mask = BinaryMask::from_fn(size, size, |x, y| {
        let dx = x as f64 - c;
        let dy = y as f64 - c;
        let t = dy.atan2(dx);
        dx.hypot(dy) <= r0 * (1.0 + wobble * (k * t + phase).sin())
    });
    let lesion = [
        rng.random_range(170.0..230.0),
        rng.random_range(60.0..110.0),
        rng.random_range(60.0..110.0),
    ];
    let margin = [
        rng.random_range(110.0..160.0),
        rng.random_range(80.0..120.0),
        rng.random_range(45.0..80.0),
    ];
    let tex = (rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
    let mut image = RgbImage::new(size, size);
    for y in 0..size {
        for x in 0..size {
            let grain = rng.random_range(-4.0..4.0);
            let base = if mask.get(x, y) { lesion } else { margin };
            image.put_pixel(x, y, textured(base, 12.0, tex, x as f64 * 3.0, y as f64 * 3.0, grain));
        }
    }
    (image, mask)
}
