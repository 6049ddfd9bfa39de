use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ganit::expression::{separate_expressions, BandOptions, ExpressionLine};
use ganit::io::{image_id, list_files_with_extension, parse_detections};
use ganit::parser::{solve_line, SolveErrorKind};
use ganit::postprocess::{finalize_scales, CellPrediction, GridSpec};
use ganit::{ClassMap, Detection};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::{InputKind, SolveArgs};
use crate::error::CliError;
use crate::SCHEMA_VERSION;

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub schema_version: u32,
    pub images: Vec<ImageSolution>,
}

#[derive(Debug, Serialize)]
pub struct ImageSolution {
    pub image_id: String,
    pub detections: usize,
    pub expressions: Vec<ExpressionEntry>,
}

#[derive(Debug, Serialize)]
pub struct ExpressionEntry {
    /// Detected symbols of the line in reading order.
    pub symbols: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expression: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub had_equals: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorEntry>,
    pub y_band: (f64, f64),
}

#[derive(Debug, Serialize)]
pub struct ErrorEntry {
    pub kind: &'static str,
    pub message: String,
}

impl SolveReport {
    pub fn has_errors(&self) -> bool {
        self.images.iter().flat_map(|i| &i.expressions).any(|e| e.error.is_some())
    }
}

/// One record of a cells file.
#[derive(Debug, Deserialize)]
struct CellRecord {
    grid: Option<u32>,
    #[serde(flatten)]
    cell: CellPrediction,
}

fn error_kind(e: &SolveErrorKind) -> &'static str {
    match e {
        SolveErrorKind::Lex(_) => "malformed_number",
        SolveErrorKind::Syntax(_) => "syntax_error",
        SolveErrorKind::Eval(_) => "division_by_zero",
        SolveErrorKind::Text(_) => "unknown_symbol",
    }
}

fn entry(line: &ExpressionLine, class_map: &ClassMap) -> ExpressionEntry {
    let symbols: String = line.tokens(class_map).iter().map(|t| t.kind.ascii()).collect();
    let mut e = ExpressionEntry {
        symbols,
        expression: None,
        value: None,
        exact: None,
        had_equals: None,
        warning: None,
        error: None,
        y_band: line.y_band,
    };
    match solve_line(line, class_map) {
        Ok(sol) => {
            e.exact = Some(sol.outcome.exact());
            e.value = Some(sol.outcome.rendering);
            e.had_equals = Some(sol.outcome.had_equals);
            e.expression = Some(sol.text);
            if sol.ignored_after_eq > 0 {
                e.warning = Some(format!("{} item(s) after '=' ignored", sol.ignored_after_eq));
            }
        }
        Err(err) => e.error = Some(ErrorEntry { kind: error_kind(&err.kind), message: err.kind.to_string() }),
    }
    e
}

pub fn solve_detections(id: String, dets: &[Detection], class_map: &ClassMap, band: &BandOptions) -> ImageSolution {
    let mut lines = separate_expressions(dets, band);
    lines.sort_by(|a, b| a.y_band.0.total_cmp(&b.y_band.0));
    ImageSolution { image_id: id, detections: dets.len(), expressions: lines.iter().map(|l| entry(l, class_map)).collect() }
}

fn load_detections(file: &Path) -> Result<Vec<Detection>, CliError> {
    let text = fs::read_to_string(file).map_err(CliError::io(file))?;
    Ok(parse_detections(&text, &file.display().to_string())?)
}

fn load_cells(file: &Path, args: &SolveArgs, conf: f64, nms: f64) -> Result<Vec<Detection>, CliError> {
    let text = fs::read_to_string(file).map_err(CliError::io(file))?;
    let mut by_grid: BTreeMap<u32, Vec<CellPrediction>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| CliError::Input { path: file.to_path_buf(), message: format!("line {}: {message}", i + 1) };
        let rec: CellRecord = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        let grid = GridSpec::new(rec.grid.unwrap_or(args.grid)).map_err(|e| bad(e.to_string()))?;
        rec.cell.validate(&grid).map_err(|e| bad(e.to_string()))?;
        by_grid.entry(grid.size).or_default().push(rec.cell);
    }
    let scales: Vec<(GridSpec, &[CellPrediction])> =
        by_grid.iter().map(|(&size, cells)| (GridSpec { size, boxes_per_cell: 3 }, cells.as_slice())).collect();
    Ok(finalize_scales(&scales, conf, nms))
}

pub fn run(args: &SolveArgs, class_map: &ClassMap, conf: f64, nms: f64) -> Result<SolveReport, CliError> {
    if !(args.band_expansion > 0.0 && args.band_expansion.is_finite()) {
        return Err(CliError::Usage(format!("--band-expansion must be positive, got {}", args.band_expansion)));
    }
    let ext = match args.input_kind {
        InputKind::Detections => "txt",
        InputKind::Cells => "jsonl",
    };
    let files: Vec<PathBuf> = list_files_with_extension(&args.input, ext)?;
    let band = BandOptions { expansion: args.band_expansion };
    let images = files
        .par_iter()
        .map(|file| {
            let dets = match args.input_kind {
                InputKind::Detections => load_detections(file)?,
                InputKind::Cells => load_cells(file, args, conf, nms)?,
            };
            Ok(solve_detections(image_id(file), &dets, class_map, &band))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(SolveReport { schema_version: SCHEMA_VERSION, images })
}
