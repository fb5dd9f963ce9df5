use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{DetectionRecord, GroundTruthRecord};
use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

/// Intersection over union on continuous box geometry; 0 when the union is empty.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

/// Indices into the detection and ground-truth slices passed to [`match_detections`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchResult {
    /// `(detection, ground truth)` pairs.
    pub true_positives: Vec<(usize, usize)>,
    pub false_positives: Vec<usize>,
    pub false_negatives: Vec<usize>,
    /// `(confidence, is_tp)` for every detection, in processing order.
    pub ranked: Vec<(f64, bool)>,
}

/// Detection indices by descending confidence; equal confidences keep input order.
pub fn confidence_order(dets: &[DetectionRecord]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].confidence.total_cmp(&dets[a].confidence));
    order
}

/// Greedy matching: each detection, most confident first, takes the unmatched
/// ground truth of the same image and class with the highest IoU, and counts
/// as a true positive when that IoU exceeds `threshold`. Equal IoUs go to the
/// earlier ground truth.
pub fn match_detections(dets: &[DetectionRecord], gts: &[GroundTruthRecord], threshold: f64) -> MatchResult {
    let mut taken = vec![false; gts.len()];
    let mut out = MatchResult::default();
    for i in confidence_order(dets) {
        let d = &dets[i];
        let mut best: Option<(usize, f64)> = None;
        for (j, g) in gts.iter().enumerate() {
            if taken[j] || g.image_id != d.image_id || g.class != d.class {
                continue;
            }
            let v = iou(&d.bbox, &g.bbox);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((j, v));
            }
        }
        match best {
            Some((j, v)) if v > threshold => {
                taken[j] = true;
                out.true_positives.push((i, j));
                out.ranked.push((d.confidence, true));
            }
            _ => {
                out.false_positives.push(i);
                out.ranked.push((d.confidence, false));
            }
        }
    }
    out.false_negatives = (0..gts.len()).filter(|&j| !taken[j]).collect();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
}

/// Cumulative precision/recall after each ranked detection, and the area
/// under the precision envelope (each precision replaced by the best
/// precision at equal or higher recall).
pub fn pr_curve_and_ap(ranked: &[(f64, bool)], n_ground_truth: usize, class: &str) -> Result<(Vec<PrPoint>, f64)> {
    if n_ground_truth == 0 {
        return Err(Error::NoGroundTruth(class.to_string()));
    }
    let mut curve = Vec::with_capacity(ranked.len());
    let (mut tp, mut fp) = (0usize, 0usize);
    for &(_, hit) in ranked {
        if hit {
            tp += 1;
        } else {
            fp += 1;
        }
        curve.push(PrPoint {
            recall: tp as f64 / n_ground_truth as f64,
            precision: tp as f64 / (tp + fp) as f64,
        });
    }
    let mut envelope: Vec<f64> = curve.iter().map(|p| p.precision).collect();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (p, e) in curve.iter().zip(&envelope) {
        ap += (p.recall - prev_recall) * e;
        prev_recall = p.recall;
    }
    Ok((curve, ap))
}

pub fn mean_ap(aps: &[f64]) -> Result<f64> {
    if aps.is_empty() {
        return Err(Error::NoClasses);
    }
    Ok(aps.iter().sum::<f64>() / aps.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: String,
    pub ground_truths: usize,
    pub detections: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// `None` when the class has detections but no ground truth.
    pub ap: Option<f64>,
    pub curve: Vec<PrPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub iou_threshold: f64,
    /// Sorted by class name.
    pub classes: Vec<ClassReport>,
    pub map: f64,
}

/// Scores every class present in either input.
pub fn evaluate(dets: &[DetectionRecord], gts: &[GroundTruthRecord], threshold: f64) -> Result<EvalReport> {
    let names: BTreeSet<&str> = dets
        .iter()
        .map(|d| d.class.as_str())
        .chain(gts.iter().map(|g| g.class.as_str()))
        .collect();
    let mut classes = Vec::new();
    let mut aps = Vec::new();
    for name in names {
        let d: Vec<DetectionRecord> = dets.iter().filter(|r| r.class == name).cloned().collect();
        let g: Vec<GroundTruthRecord> = gts.iter().filter(|r| r.class == name).cloned().collect();
        let m = match_detections(&d, &g, threshold);
        let (curve, ap) = if g.is_empty() {
            (Vec::new(), None)
        } else {
            let (curve, ap) = pr_curve_and_ap(&m.ranked, g.len(), name)?;
            aps.push(ap);
            (curve, Some(ap))
        };
        classes.push(ClassReport {
            class: name.to_string(),
            ground_truths: g.len(),
            detections: d.len(),
            tp: m.true_positives.len(),
            fp: m.false_positives.len(),
            fn_: m.false_negatives.len(),
            ap,
            curve,
        });
    }
    Ok(EvalReport {
        iou_threshold: threshold,
        classes,
        map: mean_ap(&aps)?,
    })
}

impl EvalReport {
    /// Plain-text report; fixed precision keeps it byte-stable.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        writeln!(w, "iou_threshold {:.9}", self.iou_threshold).unwrap();
        for c in &self.classes {
            let ap = c.ap.map_or("none".to_string(), |v| format!("{v:.9}"));
            writeln!(
                w,
                "class {} gt {} det {} tp {} fp {} fn {} ap {}",
                c.class, c.ground_truths, c.detections, c.tp, c.fp, c.fn_, ap
            )
            .unwrap();
        }
        for c in &self.classes {
            for p in &c.curve {
                writeln!(w, "pr {} {:.9} {:.9}", c.class, p.recall, p.precision).unwrap();
            }
        }
        writeln!(w, "map {:.9}", self.map).unwrap();
        out
    }

    pub fn class(&self, name: &str) -> Option<&ClassReport> {
        self.classes.iter().find(|c| c.class == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(img: &str, class: &str, b: BoundingBox, c: f64) -> DetectionRecord {
        DetectionRecord {
            image_id: img.into(),
            class: class.into(),
            bbox: b,
            confidence: c,
        }
    }

    fn gt(img: &str, class: &str, b: BoundingBox) -> GroundTruthRecord {
        GroundTruthRecord {
            image_id: img.into(),
            class: class.into(),
            bbox: b,
            identity: "f".into(),
            side: None,
        }
    }

    #[test]
    fn iou_cases() {
        let a = BoundingBox::new(5.0, 5.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &BoundingBox::new(50.0, 5.0, 10.0, 10.0)), 0.0);
        assert!((iou(&a, &BoundingBox::new(10.0, 5.0, 10.0, 10.0)) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_detection_is_a_false_positive() {
        let b = BoundingBox::new(5.0, 5.0, 10.0, 10.0);
        let dets = [det("i", "head", b, 0.3), det("i", "head", b, 0.8)];
        let m = match_detections(&dets, &[gt("i", "head", b)], 0.5);
        assert_eq!(m.true_positives, vec![(1, 0)]);
        assert_eq!(m.false_positives, vec![0]);
        assert!(m.false_negatives.is_empty());
    }

    #[test]
    fn threshold_is_strict() {
        // IoU exactly 0.5
        let g = BoundingBox::new(5.0, 5.0, 10.0, 10.0);
        let d = BoundingBox::new(5.0, 2.5, 10.0, 5.0);
        assert_eq!(iou(&g, &d), 0.5);
        let m = match_detections(&[det("i", "c", d, 1.0)], &[gt("i", "c", g)], 0.5);
        assert!(m.true_positives.is_empty());
    }

    #[test]
    fn hand_case_ap_is_half() {
        let (curve, ap) = pr_curve_and_ap(&[(0.9, false), (0.4, true)], 1, "c").unwrap();
        assert_eq!(ap, 0.5);
        assert_eq!(curve[1], PrPoint { recall: 1.0, precision: 0.5 });
        assert!(matches!(pr_curve_and_ap(&[], 0, "c"), Err(Error::NoGroundTruth(_))));
    }

    #[test]
    fn map_over_classes_with_ground_truth() {
        assert_eq!(mean_ap(&[0.4, 0.6]).unwrap(), 0.5);
        assert!(matches!(mean_ap(&[]), Err(Error::NoClasses)));
        let b = BoundingBox::new(5.0, 5.0, 10.0, 10.0);
        let r = evaluate(
            &[det("i", "head", b, 0.9), det("i", "ghost", b, 0.9)],
            &[gt("i", "head", b)],
            0.5,
        )
        .unwrap();
        assert_eq!(r.map, 1.0);
        assert_eq!(r.class("ghost").unwrap().ap, None);
        assert_eq!(r.class("ghost").unwrap().fp, 1);
    }

    #[test]
    fn empty_detections_score_zero() {
        let b = BoundingBox::new(5.0, 5.0, 10.0, 10.0);
        let r = evaluate(&[], &[gt("i", "body", b), gt("j", "body", b)], 0.5).unwrap();
        assert_eq!(r.map, 0.0);
        assert_eq!(r.classes[0].fn_, 2);
    }
}
