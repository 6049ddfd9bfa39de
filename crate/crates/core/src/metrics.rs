//! Detector evaluation: greedy TP/FP matching, precision-recall curves,
//! 11-point interpolated AP and class-averaged mAP.
//!
//! Matching runs per image in descending confidence order. Each detection is
//! compared only against ground truths of its own class that are still
//! unmatched; it becomes a true positive when the best IoU is strictly above
//! the threshold. A detection with the wrong class therefore counts as a false
//! positive for its predicted class and leaves the real object as a false
//! negative of the true class.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::io::ImageSet;
use crate::model::{iou, ClassId, Detection, GroundTruthObject};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("class {0} has no ground-truth instances")]
    EmptyGroundTruth(ClassId),
    #[error("no ground truth at all")]
    NoGroundTruthAtAll,
    #[error("detections reference image `{0}` which has no ground truth entry")]
    UnknownImage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchLabel {
    /// Matched the ground truth at this index of the input slice.
    TruePositive(usize),
    FalsePositive,
}

/// A detection's outcome, in processing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionMatch {
    pub detection: usize,
    pub label: MatchLabel,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchResult {
    /// In-class detections in descending confidence order.
    pub matches: Vec<DetectionMatch>,
    /// Parallel to the ground-truth input; other-class entries stay `false`.
    pub gt_matched: Vec<bool>,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

fn by_confidence_desc(a: f64, b: f64) -> Ordering {
    b.total_cmp(&a)
}

/// Picks the unmatched same-class ground truth with the highest IoU. Ties go
/// to the lower index.
fn best_unmatched(det: &Detection, gts: &[GroundTruthObject], matched: &[bool]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, gt) in gts.iter().enumerate() {
        if matched[i] || gt.class != det.class {
            continue;
        }
        let v = iou(&det.bbox, &gt.bbox);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best
}

/// Greedy matching of one image's detections for a single class.
pub fn match_detections(
    dets: &[Detection],
    gts: &[GroundTruthObject],
    iou_threshold: f64,
    class_id: ClassId,
) -> MatchResult {
    let mut order: Vec<usize> = (0..dets.len()).filter(|&i| dets[i].class == class_id).collect();
    order.sort_by(|&a, &b| by_confidence_desc(dets[a].confidence, dets[b].confidence));

    let mut gt_matched = vec![false; gts.len()];
    let mut matches = Vec::with_capacity(order.len());
    let (mut tp, mut fp) = (0, 0);
    for i in order {
        let label = match best_unmatched(&dets[i], gts, &gt_matched) {
            Some((g, v)) if v > iou_threshold => {
                gt_matched[g] = true;
                tp += 1;
                MatchLabel::TruePositive(g)
            }
            _ => {
                fp += 1;
                MatchLabel::FalsePositive
            }
        };
        matches.push(DetectionMatch { detection: i, label });
    }
    let n_gt = gts.iter().filter(|g| g.class == class_id).count();
    MatchResult { matches, gt_matched, tp, fp, fn_: n_gt - tp }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PrCurve {
    /// `(recall, precision)` per detection, highest confidence first.
    pub points: Vec<(f64, f64)>,
}

/// Counts and curve for one class pooled over all images.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassEvaluation {
    pub curve: PrCurve,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

/// Pools the class's detections over images, sorts them by descending
/// confidence and matches greedily within each image.
pub fn evaluate_class(
    dets: &[(Detection, &str)],
    gts: &ImageSet<GroundTruthObject>,
    iou_threshold: f64,
    class_id: ClassId,
) -> Result<ClassEvaluation, MetricsError> {
    let n_gt: usize = gts.values().map(|v| v.iter().filter(|g| g.class == class_id).count()).sum();
    if n_gt == 0 {
        return Err(MetricsError::EmptyGroundTruth(class_id));
    }

    let mut pooled: Vec<&(Detection, &str)> = dets.iter().filter(|(d, _)| d.class == class_id).collect();
    pooled.sort_by(|a, b| by_confidence_desc(a.0.confidence, b.0.confidence));

    let mut matched: ImageSet<bool> = gts.iter().map(|(k, v)| (k.clone(), vec![false; v.len()])).collect();
    let empty = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut points = Vec::with_capacity(pooled.len());
    for (det, image) in pooled {
        let image_gts = gts.get(*image).unwrap_or(&empty);
        let hit = matched.get_mut(*image).and_then(|flags| match best_unmatched(det, image_gts, flags) {
            Some((g, v)) if v > iou_threshold => {
                flags[g] = true;
                Some(g)
            }
            _ => None,
        });
        if hit.is_some() {
            tp += 1;
        } else {
            fp += 1;
        }
        points.push((tp as f64 / n_gt as f64, tp as f64 / (tp + fp) as f64));
    }
    Ok(ClassEvaluation { curve: PrCurve { points }, tp, fp, fn_: n_gt - tp })
}

pub fn pr_curve(
    dets: &[(Detection, &str)],
    gts: &ImageSet<GroundTruthObject>,
    iou_threshold: f64,
    class_id: ClassId,
) -> Result<PrCurve, MetricsError> {
    evaluate_class(dets, gts, iou_threshold, class_id).map(|e| e.curve)
}

/// Mean of the interpolated precision at recall 0.0, 0.1, ..., 1.0, where the
/// interpolated precision at `r` is the best precision among points with
/// recall of at least `r` (zero if there are none).
pub fn average_precision_11pt(curve: &PrCurve) -> f64 {
    let sum: f64 = (0..=10)
        .map(|i| {
            let r = i as f64 / 10.0;
            curve
                .points
                .iter()
                .filter(|(recall, _)| *recall >= r)
                .map(|&(_, p)| p)
                .fold(0.0, f64::max)
        })
        .sum();
    sum / 11.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub class_id: ClassId,
    pub ap: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub pr_curve: Vec<(f64, f64)>,
}

/// Field order is the JSON key order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub iou_threshold: f64,
    pub map: f64,
    pub per_class: Vec<ClassReport>,
    /// Classes absent from the ground truth; they do not enter the mean.
    pub excluded_classes: Vec<ClassId>,
}

impl EvalReport {
    pub fn ap(&self, class: ClassId) -> Option<f64> {
        self.per_class.iter().find(|c| c.class_id == class).map(|c| c.ap)
    }
}

/// Evaluates every class present in the ground truth. Images missing from
/// `dets` are treated as having no detections.
pub fn evaluate_map(
    dets: &ImageSet<Detection>,
    gts: &ImageSet<GroundTruthObject>,
    iou_threshold: f64,
) -> Result<EvalReport, MetricsError> {
    if gts.values().all(|v| v.is_empty()) {
        return Err(MetricsError::NoGroundTruthAtAll);
    }
    if let Some(id) = dets.keys().find(|k| !gts.contains_key(*k)) {
        return Err(MetricsError::UnknownImage(id.clone()));
    }
    let pooled: Vec<(Detection, &str)> =
        dets.iter().flat_map(|(id, v)| v.iter().map(move |d| (*d, id.as_str()))).collect();
    let present: BTreeSet<ClassId> = gts.values().flatten().map(|g| g.class).collect();

    let mut per_class = Vec::new();
    let mut excluded_classes = Vec::new();
    for class in ClassId::all() {
        if !present.contains(&class) {
            excluded_classes.push(class);
            continue;
        }
        let eval = evaluate_class(&pooled, gts, iou_threshold, class)?;
        per_class.push(ClassReport {
            class_id: class,
            ap: average_precision_11pt(&eval.curve),
            tp: eval.tp,
            fp: eval.fp,
            fn_: eval.fn_,
            pr_curve: eval.curve.points,
        });
    }
    let map = per_class.iter().map(|c| c.ap).sum::<f64>() / per_class.len() as f64;
    Ok(EvalReport { iou_threshold, map, per_class, excluded_classes })
}
