//! Detection scoring (IoU, greedy matching, AP, mAP) and identity-disjoint folds.

mod folds;
mod metrics;
mod records;

pub use folds::{evaluate_folds, kfold_identities, kfold_split, Fold};
pub use metrics::{
    confidence_order, evaluate, iou, match_detections, mean_ap, pr_curve_and_ap, ClassReport, EvalReport, MatchResult,
    PrPoint,
};
pub use records::{
    format_detections, format_ground_truth, parse_detections, parse_ground_truth, read_detections, read_ground_truth,
    DetectionRecord, FishSide, GroundTruthRecord,
};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;
