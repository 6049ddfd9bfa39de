//! Anchor priors from k-means over ground-truth box sizes.
//!
//! Distances are `1 - IoU` between boxes that share a center, so only the
//! `(width, height)` pairs matter. Seeding is k-means++ with that distance,
//! centroids move to the arithmetic mean of their members and an empty
//! cluster is re-seeded at the box farthest from its current centroid.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_MAX_ITERS: usize = 300;

/// The anchors reported for the original 18-class detector at 608x608 input,
/// kept as a reference for output shape.
pub const REFERENCE_ANCHORS_608: [(f64, f64); 9] = [
    (14.0, 17.0),
    (23.0, 31.0),
    (34.0, 56.0),
    (68.0, 70.0),
    (42.0, 118.0),
    (117.0, 111.0),
    (105.0, 185.0),
    (170.0, 151.0),
    (219.0, 218.0),
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnchorError {
    #[error("need at least {k} boxes to fit {k} anchors, got {got}")]
    InsufficientBoxes { k: usize, got: usize },
    #[error("k must be at least 1")]
    ZeroClusters,
    #[error("box {index} has non-positive or non-finite size ({w}, {h})")]
    InvalidBox { index: usize, w: f64, h: f64 },
}

/// Unit of the anchor dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnchorUnit {
    Normalized,
    Pixels { width: u32, height: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorSet {
    pub unit: AnchorUnit,
    /// `(width, height)` pairs, ascending by area.
    pub anchors: Vec<(f64, f64)>,
}

impl AnchorSet {
    fn sorted(unit: AnchorUnit, mut anchors: Vec<(f64, f64)>) -> Self {
        anchors.sort_by(|a, b| (a.0 * a.1).total_cmp(&(b.0 * b.1)).then(a.0.total_cmp(&b.0)));
        AnchorSet { unit, anchors }
    }

    /// Rescales normalized anchors to a pixel resolution.
    pub fn to_pixels(&self, width: u32, height: u32) -> AnchorSet {
        let (sx, sy) = match self.unit {
            AnchorUnit::Normalized => (width as f64, height as f64),
            AnchorUnit::Pixels { width: w0, height: h0 } => {
                (width as f64 / w0 as f64, height as f64 / h0 as f64)
            }
        };
        AnchorSet::sorted(
            AnchorUnit::Pixels { width, height },
            self.anchors.iter().map(|&(w, h)| (w * sx, h * sy)).collect(),
        )
    }

    /// Darknet `anchors=` line: `w,h, w,h, ...`. Pixel anchors are rounded to
    /// integers, normalized ones printed with six decimals.
    pub fn darknet_line(&self) -> String {
        self.anchors
            .iter()
            .map(|&(w, h)| match self.unit {
                AnchorUnit::Pixels { .. } => format!("{},{}", w.round() as i64, h.round() as i64),
                AnchorUnit::Normalized => format!("{w:.6},{h:.6}"),
            })
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// IoU of two boxes aligned at a common center.
pub fn anchor_iou(a: (f64, f64), b: (f64, f64)) -> f64 {
    let inter = a.0.min(b.0) * a.1.min(b.1);
    inter / (a.0 * a.1 + b.0 * b.1 - inter)
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    1.0 - anchor_iou(a, b)
}

/// Full clustering output including the convergence trace.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorFit {
    pub anchors: AnchorSet,
    /// Number of assignment steps performed.
    pub iterations: usize,
    pub converged: bool,
    /// Total distance of every box to its assigned centroid, per assignment step.
    pub distance_history: Vec<f64>,
    /// Mean distance at the final assignment.
    pub mean_distance: f64,
}

/// Running mean kept as offsets from the first member, so the mean of equal
/// boxes is exact.
#[derive(Debug, Clone, Copy)]
struct MeanAcc {
    base: (f64, f64),
    dw: f64,
    dh: f64,
    n: usize,
}

impl MeanAcc {
    fn add(&mut self, b: (f64, f64)) {
        self.dw += b.0 - self.base.0;
        self.dh += b.1 - self.base.1;
        self.n += 1;
    }

    fn mean(&self) -> (f64, f64) {
        (self.base.0 + self.dw / self.n as f64, self.base.1 + self.dh / self.n as f64)
    }
}

fn canonical_order(a: &(f64, f64), b: &(f64, f64)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
}

fn nearest(b: (f64, f64), centroids: &[(f64, f64)]) -> (usize, f64) {
    let mut best = (0, distance(b, centroids[0]));
    for (j, &c) in centroids.iter().enumerate().skip(1) {
        let d = distance(b, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn seed_centroids(boxes: &[(f64, f64)], k: usize, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let mut centroids = vec![boxes[rng.random_range(0..boxes.len())]];
    let mut closest: Vec<f64> = boxes.iter().map(|&b| distance(b, centroids[0])).collect();
    while centroids.len() < k {
        let weights: Vec<f64> = closest.iter().map(|d| d * d).collect();
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = boxes.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                if *w > 0.0 && target < *w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..boxes.len())
        };
        let c = boxes[pick];
        centroids.push(c);
        for (d, &b) in closest.iter_mut().zip(boxes) {
            *d = d.min(distance(b, c));
        }
    }
    centroids
}

/// Lloyd iterations until the assignment vector repeats or `max_iters`
/// assignment steps have run.
pub fn fit_anchors(
    boxes: &[(f64, f64)],
    k: usize,
    seed: u64,
    max_iters: usize,
    unit: AnchorUnit,
) -> Result<AnchorFit, AnchorError> {
    if k == 0 {
        return Err(AnchorError::ZeroClusters);
    }
    if boxes.len() < k {
        return Err(AnchorError::InsufficientBoxes { k, got: boxes.len() });
    }
    if let Some((index, &(w, h))) =
        boxes.iter().enumerate().find(|(_, &(w, h))| !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()))
    {
        return Err(AnchorError::InvalidBox { index, w, h });
    }

    let mut points = boxes.to_vec();
    points.sort_by(canonical_order);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(&points, k, &mut rng);
    let mut assignment: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    let mut converged = false;

    for _ in 0..max_iters.max(1) {
        let step: Vec<(usize, f64)> = points.iter().map(|&b| nearest(b, &centroids)).collect();
        let next: Vec<usize> = step.iter().map(|s| s.0).collect();
        history.push(step.iter().map(|s| s.1).sum());
        if next == assignment {
            converged = true;
            break;
        }
        assignment = next;

        let mut sums: Vec<Option<MeanAcc>> = vec![None; k];
        for (&b, &j) in points.iter().zip(&assignment) {
            sums[j].get_or_insert(MeanAcc { base: b, dw: 0.0, dh: 0.0, n: 0 }).add(b);
        }
        let mut taken = vec![false; points.len()];
        for j in 0..k {
            if let Some(acc) = &sums[j] {
                centroids[j] = acc.mean();
                continue;
            }
            // empty cluster: move to the box farthest from its own centroid
            let far = (0..points.len())
                .filter(|&i| !taken[i])
                .max_by(|&a, &b| {
                    let da = distance(points[a], centroids[assignment[a]]);
                    let db = distance(points[b], centroids[assignment[b]]);
                    da.total_cmp(&db).then(b.cmp(&a))
                })
                .expect("at least k boxes");
            taken[far] = true;
            centroids[j] = points[far];
        }
    }

    let iterations = history.len();
    let final_total = *history.last().expect("at least one assignment step");
    Ok(AnchorFit {
        anchors: AnchorSet::sorted(unit, centroids),
        iterations,
        converged,
        distance_history: history,
        mean_distance: final_total / points.len() as f64,
    })
}

pub fn cluster_anchors(
    boxes: &[(f64, f64)],
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<AnchorSet, AnchorError> {
    fit_anchors(boxes, k, seed, max_iters, AnchorUnit::Normalized).map(|f| f.anchors)
}
