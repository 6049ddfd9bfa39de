//! Shared domain types: the 18-symbol vocabulary, normalized boxes, detections
//! and ground-truth objects.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of symbol classes the detector distinguishes.
pub const NUM_CLASSES: usize = 18;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("class id {0} is outside [0, {max}]", max = NUM_CLASSES - 1)]
    OutOfRangeClass(i64),
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("confidence {0} is outside [0, 1]")]
    ConfidenceOutOfRange(f64),
    #[error("unknown symbol name `{0}`")]
    UnknownSymbol(String),
    #[error("class map: {0}")]
    ClassMap(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
}

/// Index into the detector's class vocabulary, always in `[0, 17]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ClassId(u8);

impl ClassId {
    pub fn new(id: u8) -> Result<Self, ModelError> {
        if (id as usize) < NUM_CLASSES {
            Ok(ClassId(id))
        } else {
            Err(ModelError::OutOfRangeClass(id as i64))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = ClassId> {
        (0..NUM_CLASSES as u8).map(ClassId)
    }
}

impl TryFrom<u8> for ClassId {
    type Error = ModelError;

    fn try_from(id: u8) -> Result<Self, Self::Error> {
        ClassId::new(id)
    }
}

impl From<ClassId> for u8 {
    fn from(c: ClassId) -> u8 {
        c.0
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Semantic meaning of a detected glyph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Digit(u8),
    Add,
    Sub,
    Mul,
    Div,
    LBr,
    RBr,
    Eq,
    Dot,
}

impl Symbol {
    /// Symbol names as used in class-map files.
    pub fn name(self) -> &'static str {
        const DIGITS: [&str; 10] = ["d0", "d1", "d2", "d3", "d4", "d5", "d6", "d7", "d8", "d9"];
        match self {
            Symbol::Digit(d) => DIGITS[d as usize],
            Symbol::Add => "add",
            Symbol::Sub => "sub",
            Symbol::Mul => "mul",
            Symbol::Div => "div",
            Symbol::LBr => "lbr",
            Symbol::RBr => "rbr",
            Symbol::Eq => "eq",
            Symbol::Dot => "dot",
        }
    }

    /// ASCII character used in canonical expression text.
    pub fn ascii(self) -> char {
        match self {
            Symbol::Digit(d) => (b'0' + d) as char,
            Symbol::Add => '+',
            Symbol::Sub => '-',
            Symbol::Mul => '*',
            Symbol::Div => '/',
            Symbol::LBr => '(',
            Symbol::RBr => ')',
            Symbol::Eq => '=',
            Symbol::Dot => '.',
        }
    }

    /// Accepts ASCII as well as the usual typographic operator glyphs.
    pub fn from_char(c: char) -> Option<Symbol> {
        Some(match c {
            '0'..='9' => Symbol::Digit(c as u8 - b'0'),
            '০'..='৯' => Symbol::Digit((c as u32 - '০' as u32) as u8),
            '+' => Symbol::Add,
            '-' | '−' | '–' => Symbol::Sub,
            '*' | '×' => Symbol::Mul,
            '/' | '÷' => Symbol::Div,
            '(' => Symbol::LBr,
            ')' => Symbol::RBr,
            '=' => Symbol::Eq,
            '.' => Symbol::Dot,
            _ => return None,
        })
    }
}

impl FromStr for Symbol {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "add" => Symbol::Add,
            "sub" => Symbol::Sub,
            "mul" => Symbol::Mul,
            "div" => Symbol::Div,
            "lbr" => Symbol::LBr,
            "rbr" => Symbol::RBr,
            "eq" => Symbol::Eq,
            "dot" => Symbol::Dot,
            _ => match s.strip_prefix('d').and_then(|d| d.parse::<u8>().ok()) {
                Some(d) if d <= 9 && s.len() == 2 => Symbol::Digit(d),
                _ => return Err(ModelError::UnknownSymbol(s.to_string())),
            },
        })
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Converts expression text such as `"(2.54+5.55)×2"` into symbols.
/// Whitespace is ignored.
pub fn symbols_from_text(text: &str) -> Result<Vec<Symbol>, ModelError> {
    text.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| Symbol::from_char(c).ok_or_else(|| ModelError::UnknownSymbol(c.to_string())))
        .collect()
}

/// Bijection between class ids and symbols.
///
/// The default assigns 0-9 to the digits, then add, sub, mul, div, lbr, rbr,
/// eq and dot to 10-17.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMap {
    symbols: [Symbol; NUM_CLASSES],
}

impl Default for ClassMap {
    fn default() -> Self {
        let mut symbols = [Symbol::Add; NUM_CLASSES];
        for (d, slot) in symbols.iter_mut().take(10).enumerate() {
            *slot = Symbol::Digit(d as u8);
        }
        symbols[10] = Symbol::Add;
        symbols[11] = Symbol::Sub;
        symbols[12] = Symbol::Mul;
        symbols[13] = Symbol::Div;
        symbols[14] = Symbol::LBr;
        symbols[15] = Symbol::RBr;
        symbols[16] = Symbol::Eq;
        symbols[17] = Symbol::Dot;
        ClassMap { symbols }
    }
}

impl ClassMap {
    pub fn symbol(&self, class: ClassId) -> Symbol {
        self.symbols[class.index()]
    }

    pub fn class_of(&self, symbol: Symbol) -> ClassId {
        let idx = self
            .symbols
            .iter()
            .position(|&s| s == symbol)
            .expect("class map covers every symbol");
        ClassId(idx as u8)
    }

    /// Parses `<class_id> <symbol-name>` lines; every id and every symbol must
    /// appear exactly once. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut slots: [Option<Symbol>; NUM_CLASSES] = [None; NUM_CLASSES];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(ModelError::ClassMap(format!(
                    "line {}: expected `<class_id> <symbol-name>`",
                    lineno + 1
                )));
            }
            let id: u8 = fields[0].parse().map_err(|_| {
                ModelError::ClassMap(format!("line {}: bad class id `{}`", lineno + 1, fields[0]))
            })?;
            let class = ClassId::new(id)?;
            let symbol: Symbol = fields[1].parse()?;
            if slots[class.index()].is_some() {
                return Err(ModelError::ClassMap(format!("class id {id} assigned twice")));
            }
            if slots.iter().flatten().any(|&s| s == symbol) {
                return Err(ModelError::ClassMap(format!("symbol `{symbol}` assigned twice")));
            }
            slots[class.index()] = Some(symbol);
        }
        let mut symbols = [Symbol::Add; NUM_CLASSES];
        for (i, slot) in slots.iter().enumerate() {
            symbols[i] =
                slot.ok_or_else(|| ModelError::ClassMap(format!("class id {i} is not assigned")))?;
        }
        Ok(ClassMap { symbols })
    }
}

/// Axis-aligned box in center form, normalized to the image size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x_center: f64,
    pub y_center: f64,
    pub width: f64,
    pub height: f64,
}

impl BBox {
    /// Rejects centers outside `[0, 1]` and sizes outside `(0, 1]`.
    pub fn new(x_center: f64, y_center: f64, width: f64, height: f64) -> Result<Self, ModelError> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(x_center) || !unit(y_center) {
            return Err(ModelError::InvalidBox(format!(
                "center ({x_center}, {y_center}) outside [0, 1]"
            )));
        }
        if !(width > 0.0 && width <= 1.0 && height > 0.0 && height <= 1.0) {
            return Err(ModelError::InvalidBox(format!(
                "size ({width}, {height}) outside (0, 1]"
            )));
        }
        Ok(BBox { x_center, y_center, width, height })
    }

    pub fn x_min(&self) -> f64 {
        self.x_center - 0.5 * self.width
    }

    pub fn x_max(&self) -> f64 {
        self.x_center + 0.5 * self.width
    }

    pub fn y_min(&self) -> f64 {
        self.y_center - 0.5 * self.height
    }

    pub fn y_max(&self) -> f64 {
        self.y_center + 0.5 * self.height
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    /// Corners `(x_min, y_min, x_max, y_max)` clamped to the image.
    pub fn corners_clamped(&self) -> (f64, f64, f64, f64) {
        (
            self.x_min().clamp(0.0, 1.0),
            self.y_min().clamp(0.0, 1.0),
            self.x_max().clamp(0.0, 1.0),
            self.y_max().clamp(0.0, 1.0),
        )
    }
}

/// Intersection over union of two boxes, computed in corner form.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let iw = (a.x_max().min(b.x_max()) - a.x_min().max(b.x_min())).max(0.0);
    let ih = (a.y_max().min(b.y_max()) - a.y_min().max(b.y_min())).max(0.0);
    let inter = iw * ih;
    if inter <= 0.0 {
        return 0.0;
    }
    let area = |b: &BBox| (b.x_max() - b.x_min()) * (b.y_max() - b.y_min());
    let union = area(a) + area(b) - inter;
    (inter / union).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub class: ClassId,
    pub bbox: BBox,
    pub confidence: f64,
}

impl Detection {
    pub fn new(class: ClassId, bbox: BBox, confidence: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(ModelError::ConfidenceOutOfRange(confidence));
        }
        Ok(Detection { class, bbox, confidence })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthObject {
    pub class: ClassId,
    pub bbox: BBox,
}

impl GroundTruthObject {
    /// Treats the object as a detection with the given confidence.
    pub fn as_detection(&self, confidence: f64) -> Detection {
        Detection { class: self.class, bbox: self.bbox, confidence }
    }
}

/// One image worth of objects, either ground truth or detections.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene<T = GroundTruthObject> {
    pub image_id: String,
    pub width_px: u32,
    pub height_px: u32,
    pub objects: Vec<T>,
}

impl<T> Scene<T> {
    pub fn new(image_id: impl Into<String>, width_px: u32, height_px: u32, objects: Vec<T>) -> Result<Self, ModelError> {
        let image_id = image_id.into();
        if image_id.is_empty() {
            return Err(ModelError::InvalidScene("image id is empty".into()));
        }
        if width_px == 0 || height_px == 0 {
            return Err(ModelError::InvalidScene("pixel dimensions must be positive".into()));
        }
        Ok(Scene { image_id, width_px, height_px, objects })
    }
}
