use ganit::anchors::{fit_anchors, AnchorUnit};
use ganit::io::read_annotations;
use serde::Serialize;

use crate::args::AnchorArgs;
use crate::error::CliError;
use crate::SCHEMA_VERSION;

#[derive(Debug, Serialize)]
pub struct AnchorOutput {
    pub schema_version: u32,
    pub k: usize,
    pub seed: u64,
    pub boxes: usize,
    pub unit: AnchorUnit,
    pub anchors: Vec<(f64, f64)>,
    pub darknet: String,
    pub iterations: usize,
    pub converged: bool,
    pub mean_distance: f64,
}

pub fn run(args: &AnchorArgs, seed: u64) -> Result<AnchorOutput, CliError> {
    if args.width == 0 || args.height == 0 {
        return Err(CliError::Usage("--width and --height must be positive".into()));
    }
    let (unit, sx, sy) = if args.normalized {
        (AnchorUnit::Normalized, 1.0, 1.0)
    } else {
        (AnchorUnit::Pixels { width: args.width, height: args.height }, args.width as f64, args.height as f64)
    };
    let boxes: Vec<(f64, f64)> = read_annotations(&args.annotations)?
        .iter()
        .flat_map(|(_, objs)| objs.iter().map(|o| (o.bbox.width * sx, o.bbox.height * sy)))
        .collect();
    let fit = fit_anchors(&boxes, args.k, seed, args.max_iters, unit).map_err(|e| CliError::Domain(e.to_string()))?;
    Ok(AnchorOutput {
        schema_version: SCHEMA_VERSION,
        k: args.k,
        seed,
        boxes: boxes.len(),
        unit,
        darknet: fit.anchors.darknet_line(),
        anchors: fit.anchors.anchors,
        iterations: fit.iterations,
        converged: fit.converged,
        mean_distance: fit.mean_distance,
    })
}
