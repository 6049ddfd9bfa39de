use std::fmt::Write as _;

use ganit::io::{read_annotations, read_detections};
use ganit::metrics::evaluate_map;
use ganit::{ClassMap, Detection, GroundTruthObject, ImageSet};
use serde::Serialize;

use crate::args::EvalArgs;
use crate::error::CliError;
use crate::SCHEMA_VERSION;

#[derive(Debug, Serialize)]
pub struct EvalOutput {
    pub schema_version: u32,
    pub iou_threshold: f64,
    pub images: usize,
    pub map: f64,
    pub per_class: Vec<ClassEntry>,
    pub excluded_classes: Vec<u8>,
}

#[derive(Debug, Serialize)]
pub struct ClassEntry {
    pub class_id: u8,
    pub symbol: &'static str,
    pub ap: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub pr_curve: Vec<(f64, f64)>,
}

pub fn run(args: &EvalArgs, class_map: &ClassMap, iou_threshold: f64) -> Result<EvalOutput, CliError> {
    let gts: ImageSet<GroundTruthObject> = read_annotations(&args.annotations)?.into_iter().collect();
    let dets: ImageSet<Detection> = read_detections(&args.detections)?.into_iter().collect();
    let missing: Vec<&str> = dets.keys().filter(|k| !gts.contains_key(*k)).map(String::as_str).collect();
    if !missing.is_empty() {
        return Err(CliError::Input {
            path: args.annotations.clone(),
            message: format!("missing annotation for image(s): {}", missing.join(", ")),
        });
    }
    let report = evaluate_map(&dets, &gts, iou_threshold).map_err(|e| CliError::Input {
        path: args.annotations.clone(),
        message: e.to_string(),
    })?;
    Ok(EvalOutput {
        schema_version: SCHEMA_VERSION,
        iou_threshold,
        images: gts.len(),
        map: report.map,
        per_class: report
            .per_class
            .into_iter()
            .map(|c| ClassEntry {
                class_id: c.class_id.into(),
                symbol: class_map.symbol(c.class_id).name(),
                ap: c.ap,
                tp: c.tp,
                fp: c.fp,
                fn_: c.fn_,
                pr_curve: c.pr_curve,
            })
            .collect(),
        excluded_classes: report.excluded_classes.into_iter().map(u8::from).collect(),
    })
}

pub fn summary_table(out: &EvalOutput) -> String {
    let mut s = String::new();
    writeln!(s, "{:>5} {:>6} {:>8} {:>6} {:>6} {:>6}", "class", "symbol", "AP", "TP", "FP", "FN").unwrap();
    for c in &out.per_class {
        writeln!(s, "{:>5} {:>6} {:>8.4} {:>6} {:>6} {:>6}", c.class_id, c.symbol, c.ap, c.tp, c.fp, c.fn_).unwrap();
    }
    writeln!(s, "mAP@{} = {:.4} over {} classes, {} images", out.iou_threshold, out.map, out.per_class.len(), out.images).unwrap();
    s
}
