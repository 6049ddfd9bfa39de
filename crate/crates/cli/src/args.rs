use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ganit", version, about = "Solve, evaluate and synthesize handwritten arithmetic detections")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// IoU a detection must exceed to count as a true positive
    #[arg(long, global = true, default_value_t = 0.5)]
    pub iou_threshold: f64,
    /// Minimum class-specific confidence kept when decoding cells
    #[arg(long, global = true, default_value_t = 0.25)]
    pub conf_threshold: f64,
    /// IoU above which NMS suppresses a box
    #[arg(long, global = true, default_value_t = 0.45)]
    pub nms_threshold: f64,
    /// `<class_id> <symbol-name>` mapping file
    #[arg(long, global = true)]
    pub class_map: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output file (output directory for `gen`)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Separate, parse and evaluate the expressions in each image
    Solve(SolveArgs),
    /// Per-class 11-point AP and mAP of detections against annotations
    EvalMap(EvalArgs),
    /// Anchor priors by k-means over annotated box sizes
    Anchors(AnchorArgs),
    /// Write synthetic annotated scenes and simulated detections
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    /// `.txt` detection files
    Detections,
    /// `.jsonl` files of per-cell predictions
    Cells,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Detection file or directory
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputKind::Detections)]
    pub input_kind: InputKind,
    /// Grid side for cell records without a `grid` field
    #[arg(long, default_value_t = 19)]
    pub grid: u32,
    /// Band height multiplier used for line separation
    #[arg(long, default_value_t = 1.0)]
    pub band_expansion: f64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub detections: PathBuf,
    #[arg(long)]
    pub annotations: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnchorArgs {
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(long, default_value_t = 9)]
    pub k: usize,
    #[arg(long, default_value_t = ganit::anchors::DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    /// Network input width the anchors are expressed in
    #[arg(long, default_value_t = 608)]
    pub width: u32,
    #[arg(long, default_value_t = 608)]
    pub height: u32,
    /// Report anchors as fractions of the image instead of pixels
    #[arg(long)]
    pub normalized: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 10)]
    pub scenes: u64,
    /// JSON file with optional `layout` and `noise` objects
    #[arg(long)]
    pub spec_file: Option<PathBuf>,
    #[arg(long)]
    pub noise_drop: Option<f64>,
    #[arg(long)]
    pub noise_spurious: Option<f64>,
    #[arg(long)]
    pub noise_flip: Option<f64>,
    #[arg(long)]
    pub noise_box: Option<f64>,
    #[arg(long)]
    pub jitter_pos: Option<f64>,
    #[arg(long)]
    pub jitter_size: Option<f64>,
    #[arg(long)]
    pub scale_jitter: Option<f64>,
    #[arg(long)]
    pub shear: Option<f64>,
}
