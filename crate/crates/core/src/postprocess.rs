//! Turns per-cell detector outputs into final detections.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{iou, BBox, ClassId, Detection, NUM_CLASSES};

pub const DEFAULT_CONF_THRESHOLD: f64 = 0.25;
pub const DEFAULT_NMS_THRESHOLD: f64 = 0.45;
/// Grid sides of the three detection heads at 608x608 input.
pub const DEFAULT_GRID_SIZES: [u32; 3] = [19, 38, 76];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CellError {
    #[error("cell ({row}, {col}) is outside a {size}x{size} grid")]
    OutOfGrid { row: u32, col: u32, size: u32 },
    #[error("{field} = {value} is out of range")]
    OutOfRange { field: &'static str, value: f64 },
    #[error("expected {NUM_CLASSES} class probabilities, got {0}")]
    ClassCount(usize),
    #[error("invalid grid: side {size}, {boxes_per_cell} boxes per cell")]
    InvalidGrid { size: u32, boxes_per_cell: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub size: u32,
    pub boxes_per_cell: u32,
}

impl GridSpec {
    pub fn new(size: u32) -> Result<Self, CellError> {
        let g = GridSpec { size, boxes_per_cell: 3 };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), CellError> {
        if self.size == 0 || self.boxes_per_cell == 0 {
            return Err(CellError::InvalidGrid { size: self.size, boxes_per_cell: self.boxes_per_cell });
        }
        Ok(())
    }
}

/// One predicted box of one grid cell, with already-activated outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellPrediction {
    pub row: u32,
    pub col: u32,
    /// Center offset inside the cell, in cell units.
    pub rel_x: f64,
    pub rel_y: f64,
    /// Box size as a fraction of the image.
    pub norm_w: f64,
    pub norm_h: f64,
    /// Object probability times predicted IoU, delivered as one number.
    pub objectness: f64,
    /// `P(class | object)` for every class.
    pub class_probs: Vec<f64>,
}

impl CellPrediction {
    pub fn validate(&self, grid: &GridSpec) -> Result<(), CellError> {
        grid.validate()?;
        if self.row >= grid.size || self.col >= grid.size {
            return Err(CellError::OutOfGrid { row: self.row, col: self.col, size: grid.size });
        }
        let unit = |field, value: f64| {
            if (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(CellError::OutOfRange { field, value })
            }
        };
        let size = |field, value: f64| {
            if value > 0.0 && value <= 1.0 {
                Ok(())
            } else {
                Err(CellError::OutOfRange { field, value })
            }
        };
        unit("rel_x", self.rel_x)?;
        unit("rel_y", self.rel_y)?;
        size("norm_w", self.norm_w)?;
        size("norm_h", self.norm_h)?;
        unit("objectness", self.objectness)?;
        if self.class_probs.len() != NUM_CLASSES {
            return Err(CellError::ClassCount(self.class_probs.len()));
        }
        for &p in &self.class_probs {
            unit("class_prob", p)?;
        }
        Ok(())
    }
}

/// Maps a cell-relative center to image-normalized coordinates.
pub fn decode_cell(p: &CellPrediction, grid: &GridSpec) -> BBox {
    let s = grid.size as f64;
    BBox {
        x_center: ((p.col as f64 + p.rel_x) / s).clamp(0.0, 1.0),
        y_center: ((p.row as f64 + p.rel_y) / s).clamp(0.0, 1.0),
        width: p.norm_w,
        height: p.norm_h,
    }
}

/// Class-specific confidences: conditional class probability times objectness.
pub fn class_scores(p: &CellPrediction) -> [f64; NUM_CLASSES] {
    let mut out = [0.0; NUM_CLASSES];
    for (o, &c) in out.iter_mut().zip(&p.class_probs) {
        *o = c * p.objectness;
    }
    out
}

/// Total order used everywhere detections are ranked: confidence descending,
/// then class, x, y, width and height ascending.
pub fn detection_rank(a: &Detection, b: &Detection) -> Ordering {
    b.confidence
        .total_cmp(&a.confidence)
        .then(a.class.cmp(&b.class))
        .then(a.bbox.x_center.total_cmp(&b.bbox.x_center))
        .then(a.bbox.y_center.total_cmp(&b.bbox.y_center))
        .then(a.bbox.width.total_cmp(&b.bbox.width))
        .then(a.bbox.height.total_cmp(&b.bbox.height))
}

/// Class-wise greedy suppression of boxes overlapping a kept box by more than
/// `iou_threshold`.
pub fn nms(dets: &[Detection], iou_threshold: f64) -> Vec<Detection> {
    let mut sorted = dets.to_vec();
    sorted.sort_by(detection_rank);
    let mut kept: Vec<Detection> = Vec::with_capacity(sorted.len());
    for d in sorted {
        let suppressed = kept.iter().any(|k| k.class == d.class && iou(&k.bbox, &d.bbox) > iou_threshold);
        if !suppressed {
            kept.push(d);
        }
    }
    kept
}

fn best_detection(p: &CellPrediction, grid: &GridSpec) -> Detection {
    let scores = class_scores(p);
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Detection {
        class: ClassId::new(best as u8).expect("index below NUM_CLASSES"),
        bbox: decode_cell(p, grid),
        confidence: scores[best].clamp(0.0, 1.0),
    }
}

/// Decodes predictions from several detection heads, thresholds each box's
/// best class score and runs one NMS pass over the union.
pub fn finalize_scales(
    scales: &[(GridSpec, &[CellPrediction])],
    conf_threshold: f64,
    nms_threshold: f64,
) -> Vec<Detection> {
    let candidates: Vec<Detection> = scales
        .iter()
        .flat_map(|(grid, cells)| cells.iter().map(move |c| best_detection(c, grid)))
        .filter(|d| d.confidence >= conf_threshold)
        .collect();
    nms(&candidates, nms_threshold)
}

pub fn finalize(
    cells: &[CellPrediction],
    grid: &GridSpec,
    conf_threshold: f64,
    nms_threshold: f64,
) -> Vec<Detection> {
    finalize_scales(&[(*grid, cells)], conf_threshold, nms_threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(row: u32, col: u32, rel: (f64, f64), dims: (f64, f64)) -> CellPrediction {
        CellPrediction {
            row,
            col,
            rel_x: rel.0,
            rel_y: rel.1,
            norm_w: dims.0,
            norm_h: dims.1,
            objectness: 1.0,
            class_probs: vec![1.0 / 18.0; 18],
        }
    }

    #[test]
    fn decode_examples() {
        let b = decode_cell(&cell(0, 0, (0.5, 0.5), (0.1, 0.1)), &GridSpec::new(19).unwrap());
        assert_eq!((b.x_center, b.y_center), (0.5 / 19.0, 0.5 / 19.0));
        assert_eq!((b.width, b.height), (0.1, 0.1));

        let b = decode_cell(&cell(0, 0, (0.5, 0.5), (0.1, 0.1)), &GridSpec::new(1).unwrap());
        assert_eq!((b.x_center, b.y_center), (0.5, 0.5));

        let b = decode_cell(&cell(37, 37, (1.0, 1.0), (0.1, 0.1)), &GridSpec::new(38).unwrap());
        assert_eq!((b.x_center, b.y_center), (1.0, 1.0));
    }

    #[test]
    fn decode_uses_col_for_x() {
        let b = decode_cell(&cell(2, 5, (0.0, 0.0), (0.1, 0.1)), &GridSpec::new(10).unwrap());
        assert_eq!((b.x_center, b.y_center), (0.5, 0.2));
    }

    #[test]
    fn score_examples() {
        let mut c = cell(0, 0, (0.5, 0.5), (0.1, 0.1));
        c.objectness = 0.0;
        assert!(class_scores(&c).iter().all(|&s| s == 0.0));

        c.objectness = 0.9;
        assert!(class_scores(&c).iter().all(|&s| (s - 0.05).abs() < 1e-15));

        c.objectness = 0.8;
        c.class_probs = vec![0.0; 18];
        c.class_probs[3] = 0.9;
        assert!((class_scores(&c)[3] - 0.72).abs() < 1e-15);
    }

    fn det(class: u8, conf: f64, x: f64) -> Detection {
        Detection {
            class: ClassId::new(class).unwrap(),
            bbox: BBox::new(x, 0.5, 0.2, 0.2).unwrap(),
            confidence: conf,
        }
    }

    #[test]
    fn nms_examples() {
        // shift s gives IoU (0.2 - s) / (0.2 + s); s = 0.2/19 gives 0.9
        let s = 0.2 / 19.0;
        let a = det(1, 0.8, 0.5 + s);
        let b = det(1, 0.9, 0.5);
        assert!((iou(&a.bbox, &b.bbox) - 0.9).abs() < 1e-12);
        assert_eq!(nms(&[a, b], 0.45), vec![b]);

        let far = det(1, 0.8, 0.9);
        assert_eq!(nms(&[far, b], 0.45), vec![b, far]);

        let other = det(2, 0.8, 0.5 + s);
        assert_eq!(nms(&[other, b], 0.45), vec![b, other]);
    }

    #[test]
    fn finalize_examples() {
        let g = GridSpec::new(19).unwrap();
        assert!(finalize(&[], &g, 0.25, 0.45).is_empty());

        let mut c = cell(3, 4, (0.5, 0.5), (0.1, 0.1));
        c.objectness = 0.5;
        c.class_probs = vec![0.0; 18];
        c.class_probs[7] = 0.6;
        let out = finalize(&[c.clone()], &g, 0.25, 0.45);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].class.index(), 7);
        assert!((out[0].confidence - 0.3).abs() < 1e-15);

        c.class_probs[7] = 0.4;
        assert!(finalize(&[c], &g, 0.25, 0.45).is_empty());
    }

    #[test]
    fn validation() {
        let g = GridSpec::new(19).unwrap();
        assert!(cell(0, 0, (0.5, 0.5), (0.1, 0.1)).validate(&g).is_ok());
        assert!(matches!(cell(19, 0, (0.5, 0.5), (0.1, 0.1)).validate(&g), Err(CellError::OutOfGrid { .. })));
        assert!(cell(0, 0, (1.5, 0.5), (0.1, 0.1)).validate(&g).is_err());
        assert!(cell(0, 0, (0.5, 0.5), (0.0, 0.1)).validate(&g).is_err());
        let mut c = cell(0, 0, (0.5, 0.5), (0.1, 0.1));
        c.class_probs.pop();
        assert_eq!(c.validate(&g), Err(CellError::ClassCount(17)));
        assert!(GridSpec::new(0).is_err());
    }
}
