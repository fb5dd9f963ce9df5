//! Reference implementations used as test oracles. They are written
//! independently of the library and favor obviousness over speed.

#![allow(dead_code)]

use flatpart::evaluation::{DetectionRecord, GroundTruthRecord};
use flatpart::raster::BinaryMask;
use flatpart::BoundingBox;
use rand::Rng;

/// Covariance of foreground coordinates by the direct double sum over the raster.
pub fn brute_covariance(mask: &BinaryMask) -> [[f64; 2]; 2] {
    let (w, h) = mask.dimensions();
    let mut n = 0.0;
    let (mut mx, mut my) = (0.0, 0.0);
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                n += 1.0;
                mx += x as f64;
                my += y as f64;
            }
        }
    }
    mx /= n;
    my /= n;
    let mut c = [[0.0; 2]; 2];
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                let d = [x as f64 - mx, y as f64 - my];
                for i in 0..2 {
                    for j in 0..2 {
                        c[i][j] += d[i] * d[j];
                    }
                }
            }
        }
    }
    c.map(|r| r.map(|v| v / n))
}

/// Overlap via coordinate compression: sum the elementary cells covered by both boxes.
pub fn oracle_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let mut xs = vec![a.left(), a.right(), b.left(), b.right()];
    let mut ys = vec![a.top(), a.bottom(), b.top(), b.bottom()];
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let inside = |r: &BoundingBox, x: f64, y: f64| x > r.left() && x < r.right() && y > r.top() && y < r.bottom();
    let (mut inter, mut union) = (0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            let cell = (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
            if cell <= 0.0 {
                continue;
            }
            let (cx, cy) = ((xs[i] + xs[i + 1]) / 2.0, (ys[j] + ys[j + 1]) / 2.0);
            let (ia, ib) = (inside(a, cx, cy), inside(b, cx, cy));
            if ia && ib {
                inter += cell;
            }
            if ia || ib {
                union += cell;
            }
        }
    }
    if union == 0.0 {
        0.0
    } else {
        inter / union
    }
}

pub struct OracleCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    /// TP flags in processing order.
    pub hits: Vec<bool>,
}

/// Greedy matching by repeated selection: the most confident unprocessed
/// detection (earliest on ties) claims the best remaining same-image,
/// same-class ground truth (earliest on ties); IoU must exceed the threshold.
pub fn oracle_match(dets: &[DetectionRecord], gts: &[GroundTruthRecord], threshold: f64) -> OracleCounts {
    let mut done = vec![false; dets.len()];
    let mut used = vec![false; gts.len()];
    let mut hits = Vec::new();
    for _ in 0..dets.len() {
        let mut pick: Option<usize> = None;
        for i in 0..dets.len() {
            if !done[i] && pick.is_none_or(|p| dets[i].confidence > dets[p].confidence) {
                pick = Some(i);
            }
        }
        let i = pick.unwrap();
        done[i] = true;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..gts.len() {
            if used[j] || gts[j].image_id != dets[i].image_id || gts[j].class != dets[i].class {
                continue;
            }
            let v = oracle_iou(&dets[i].bbox, &gts[j].bbox);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((j, v));
            }
        }
        let hit = matches!(best, Some((_, v)) if v > threshold);
        if hit {
            used[best.unwrap().0] = true;
        }
        hits.push(hit);
    }
    let tp = hits.iter().filter(|&&h| h).count();
    OracleCounts {
        tp,
        fp: hits.len() - tp,
        fn_: used.iter().filter(|&&u| !u).count(),
        hits,
    }
}

/// Envelope AP written as a sum over true positives: each adds `1 / n_gt`
/// recall at the best precision reached at or after it.
pub fn oracle_ap(hits: &[bool], n_gt: usize) -> f64 {
    let precision: Vec<f64> = (0..hits.len())
        .map(|k| hits[..=k].iter().filter(|&&h| h).count() as f64 / (k + 1) as f64)
        .collect();
    let mut ap = 0.0;
    for k in 0..hits.len() {
        if hits[k] {
            let best = precision[k..].iter().copied().fold(0.0, f64::max);
            ap += best / n_gt as f64;
        }
    }
    ap
}

/// `(classes with their AP or None, mAP)` over the union of class names.
pub fn oracle_evaluate(dets: &[DetectionRecord], gts: &[GroundTruthRecord], threshold: f64) -> (Vec<(String, usize, usize, usize, Option<f64>)>, Option<f64>) {
    let mut names: Vec<String> = dets.iter().map(|d| d.class.clone()).chain(gts.iter().map(|g| g.class.clone())).collect();
    names.sort();
    names.dedup();
    let mut rows = Vec::new();
    let mut aps = Vec::new();
    for name in names {
        let d: Vec<DetectionRecord> = dets.iter().filter(|r| r.class == name).cloned().collect();
        let g: Vec<GroundTruthRecord> = gts.iter().filter(|r| r.class == name).cloned().collect();
        let m = oracle_match(&d, &g, threshold);
        let ap = (!g.is_empty()).then(|| oracle_ap(&m.hits, g.len()));
        if let Some(v) = ap {
            aps.push(v);
        }
        rows.push((name, m.tp, m.fp, m.fn_, ap));
    }
    let map = (!aps.is_empty()).then(|| aps.iter().sum::<f64>() / aps.len() as f64);
    (rows, map)
}

/// Small random detection problem on a coarse grid so overlaps and ties are common.
pub fn random_instance(rng: &mut impl Rng) -> (Vec<DetectionRecord>, Vec<GroundTruthRecord>) {
    let classes = ["head", "fins", "body"];
    let n_classes = rng.random_range(1..=3);
    let images = ["a", "b"];
    let boxed = |rng: &mut dyn rand::RngCore| {
        let x = rng.random_range(0..6) as f64 * 2.0;
        let y = rng.random_range(0..6) as f64 * 2.0;
        let w = rng.random_range(1..6) as f64 * 2.0;
        let h = rng.random_range(1..6) as f64 * 2.0;
        BoundingBox::from_corners(x, y, x + w, y + h)
    };
    let n_gt = rng.random_range(0..=6);
    let gts: Vec<GroundTruthRecord> = (0..n_gt)
        .map(|i| GroundTruthRecord {
            image_id: images[rng.random_range(0..2)].into(),
            class: classes[rng.random_range(0..n_classes)].into(),
            bbox: boxed(rng),
            identity: format!("id{i}"),
            side: None,
        })
        .collect();
    let n_det = rng.random_range(0..=6);
    let dets: Vec<DetectionRecord> = (0..n_det)
        .map(|_| {
            // half of the detections jitter a ground truth
            let (image_id, class, bbox) = if !gts.is_empty() && rng.random_bool(0.5) {
                let g = &gts[rng.random_range(0..gts.len())];
                let b = g.bbox;
                let j = |rng: &mut dyn rand::RngCore| rng.random_range(-2..=2) as f64;
                (g.image_id.clone(), g.class.clone(), BoundingBox::new(b.cx + j(rng), b.cy + j(rng), b.w, b.h))
            } else {
                (images[rng.random_range(0..2)].to_string(), classes[rng.random_range(0..n_classes)].to_string(), boxed(rng))
            };
            DetectionRecord {
                image_id,
                class,
                bbox,
                confidence: rng.random_range(1..=9) as f64 / 10.0,
            }
        })
        .collect();
    (dets, gts)
}

/// Kolmogorov-Smirnov statistic of `samples` against the uniform law on `[lo, hi]`.
pub fn ks_uniform(mut samples: Vec<f64>, lo: f64, hi: f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Critical value of the one-sample KS statistic at `alpha = 0.01` (asymptotic).
pub fn ks_critical_001(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}
