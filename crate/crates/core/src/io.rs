//! Plain-text annotation and detection files.
//!
//! Annotation lines are `<class_id> <x_center> <y_center> <width> <height>`;
//! detection lines insert `<confidence>` after the class id. All coordinates
//! are normalized. The file stem is the image id. Values are written with six
//! decimal places.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{BBox, ClassId, ClassMap, Detection, GroundTruthObject, ModelError, NUM_CLASSES};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{file}:{line}: malformed line: {reason}")]
    MalformedLine { file: String, line: usize, reason: String },
    #[error("{file}:{line}: class id {class} is outside [0, {max}]", max = NUM_CLASSES - 1)]
    OutOfRangeClass { file: String, line: usize, class: String },
    #[error("{file}:{line}: confidence {value} is outside [0, 1]")]
    ConfidenceOutOfRange { file: String, line: usize, value: f64 },
    #[error("{file}: {source}")]
    ClassMap { file: String, source: ModelError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |source| FormatError::Io { path: path.to_path_buf(), source }
}

/// Per-image object lists keyed (and therefore ordered) by image id.
pub type ImageSet<T> = BTreeMap<String, Vec<T>>;

struct LineCtx<'a> {
    file: &'a str,
    line: usize,
}

impl LineCtx<'_> {
    fn malformed(&self, reason: impl Into<String>) -> FormatError {
        FormatError::MalformedLine { file: self.file.to_string(), line: self.line, reason: reason.into() }
    }

    fn class(&self, field: &str) -> Result<ClassId, FormatError> {
        let id: i64 = field
            .parse()
            .map_err(|_| self.malformed(format!("class id `{field}` is not an integer")))?;
        u8::try_from(id)
            .ok()
            .and_then(|id| ClassId::new(id).ok())
            .ok_or_else(|| FormatError::OutOfRangeClass {
                file: self.file.to_string(),
                line: self.line,
                class: field.to_string(),
            })
    }

    fn number(&self, field: &str) -> Result<f64, FormatError> {
        let v: f64 = field.parse().map_err(|_| self.malformed(format!("`{field}` is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.malformed(format!("`{field}` is not finite")))
        }
    }

    fn bbox(&self, fields: &[&str]) -> Result<BBox, FormatError> {
        let v: Vec<f64> = fields.iter().map(|f| self.number(f)).collect::<Result<_, _>>()?;
        BBox::new(v[0], v[1], v[2], v[3]).map_err(|e| self.malformed(e.to_string()))
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, f)| !f.is_empty())
}

/// Parses the contents of one annotation file. `source` names the file in
/// error messages.
pub fn parse_annotations(text: &str, source: &str) -> Result<Vec<GroundTruthObject>, FormatError> {
    content_lines(text)
        .map(|(line, fields)| {
            let ctx = LineCtx { file: source, line };
            if fields.len() != 5 {
                return Err(ctx.malformed(format!("expected 5 fields, found {}", fields.len())));
            }
            Ok(GroundTruthObject { class: ctx.class(fields[0])?, bbox: ctx.bbox(&fields[1..])? })
        })
        .collect()
}

/// Parses the contents of one detection file.
pub fn parse_detections(text: &str, source: &str) -> Result<Vec<Detection>, FormatError> {
    content_lines(text)
        .map(|(line, fields)| {
            let ctx = LineCtx { file: source, line };
            if fields.len() != 6 {
                return Err(ctx.malformed(format!("expected 6 fields, found {}", fields.len())));
            }
            let class = ctx.class(fields[0])?;
            let confidence = ctx.number(fields[1])?;
            if !(0.0..=1.0).contains(&confidence) {
                return Err(FormatError::ConfidenceOutOfRange {
                    file: source.to_string(),
                    line,
                    value: confidence,
                });
            }
            Ok(Detection { class, confidence, bbox: ctx.bbox(&fields[2..])? })
        })
        .collect()
}

pub fn format_annotations(objects: &[GroundTruthObject]) -> String {
    let mut out = String::new();
    for o in objects {
        let b = &o.bbox;
        writeln!(out, "{} {:.6} {:.6} {:.6} {:.6}", o.class, b.x_center, b.y_center, b.width, b.height)
            .unwrap();
    }
    out
}

pub fn format_detections(detections: &[Detection]) -> String {
    let mut out = String::new();
    for d in detections {
        let b = &d.bbox;
        writeln!(
            out,
            "{} {:.6} {:.6} {:.6} {:.6} {:.6}",
            d.class, d.confidence, b.x_center, b.y_center, b.width, b.height
        )
        .unwrap();
    }
    out
}

/// Image id of a file: its stem.
pub fn image_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Lists the `.txt` files of a directory, sorted by name. A plain file path is
/// returned as-is.
pub fn list_text_files(path: &Path) -> Result<Vec<PathBuf>, FormatError> {
    list_files_with_extension(path, "txt")
}

pub fn list_files_with_extension(path: &Path, ext: &str) -> Result<Vec<PathBuf>, FormatError> {
    let meta = fs::metadata(path).map_err(io_err(path))?;
    if meta.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(path).map_err(io_err(path))? {
        let p = entry.map_err(io_err(path))?.path();
        if p.is_file() && p.extension().is_some_and(|e| e == ext) {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

fn read_all<T>(
    path: &Path,
    parse: impl Fn(&str, &str) -> Result<Vec<T>, FormatError>,
) -> Result<Vec<(String, Vec<T>)>, FormatError> {
    list_text_files(path)?
        .into_iter()
        .map(|file| {
            let text = fs::read_to_string(&file).map_err(io_err(&file))?;
            let objects = parse(&text, &file.display().to_string())?;
            Ok((image_id(&file), objects))
        })
        .collect()
}

/// Reads one annotation file, or every `.txt` file of a directory.
pub fn read_annotations(path: impl AsRef<Path>) -> Result<Vec<(String, Vec<GroundTruthObject>)>, FormatError> {
    read_all(path.as_ref(), parse_annotations)
}

/// Reads one detection file, or every `.txt` file of a directory.
pub fn read_detections(path: impl AsRef<Path>) -> Result<Vec<(String, Vec<Detection>)>, FormatError> {
    read_all(path.as_ref(), parse_detections)
}

pub fn write_annotations(path: impl AsRef<Path>, objects: &[GroundTruthObject]) -> Result<(), FormatError> {
    let path = path.as_ref();
    fs::write(path, format_annotations(objects)).map_err(io_err(path))
}

pub fn write_detections(path: impl AsRef<Path>, detections: &[Detection]) -> Result<(), FormatError> {
    let path = path.as_ref();
    fs::write(path, format_detections(detections)).map_err(io_err(path))
}

pub fn read_class_map(path: impl AsRef<Path>) -> Result<ClassMap, FormatError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    ClassMap::parse(&text).map_err(|source| FormatError::ClassMap { file: path.display().to_string(), source })
}
