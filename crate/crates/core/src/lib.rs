//! Post-processing and evaluation toolkit for detectors of handwritten
//! arithmetic: box geometry and file formats, mAP evaluation, anchor
//! clustering, grid decoding with NMS, expression line separation, exact
//! expression evaluation and a synthetic scene generator.

pub mod anchors;
pub mod expression;
pub mod io;
pub mod metrics;
pub mod model;
pub mod parser;
pub mod postprocess;
pub mod synth;

pub use io::ImageSet;
pub use model::{iou, BBox, ClassId, ClassMap, Detection, GroundTruthObject, Scene, Symbol, NUM_CLASSES};
