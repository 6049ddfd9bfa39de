mod anchors;
mod args;
mod error;
mod eval;
mod generate;
mod solve;

use std::fs;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use ganit::io::read_class_map;
use ganit::ClassMap;
use serde::Serialize;

use args::{Cli, Command, Common};
use error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

fn check_unit_open(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must lie strictly between 0 and 1, got {v}")))
    }
}

fn emit<T: Serialize>(value: &T, common: &Common) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
    match &common.out {
        Some(path) => fs::write(path, json).map_err(CliError::io(path)),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let c = &cli.common;
    check_unit_open("iou-threshold", c.iou_threshold)?;
    check_unit_open("conf-threshold", c.conf_threshold)?;
    check_unit_open("nms-threshold", c.nms_threshold)?;
    if c.jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let class_map = match &c.class_map {
        Some(path) => read_class_map(path)?,
        None => ClassMap::default(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(c.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;

    pool.install(|| match &cli.command {
        Command::Solve(args) => {
            let report = solve::run(args, &class_map, c.conf_threshold, c.nms_threshold)?;
            emit(&report, c)?;
            Ok(if report.has_errors() { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::EvalMap(args) => {
            let report = eval::run(args, &class_map, c.iou_threshold)?;
            eprint!("{}", eval::summary_table(&report));
            emit(&report, c)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Anchors(args) => {
            let report = anchors::run(args, c.seed)?;
            eprintln!(
                "k-means: {} boxes, {} iterations{}, mean distance {:.6}",
                report.boxes,
                report.iterations,
                if report.converged { "" } else { " (not converged)" },
                report.mean_distance
            );
            eprintln!("anchors = {}", report.darknet);
            emit(&report, c)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen(args) => {
            let out = c.out.as_ref().ok_or_else(|| CliError::Usage("gen requires --out <dir>".into()))?;
            let n = generate::run(args, out, &class_map, c.seed)?;
            println!("{n} scenes written to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
