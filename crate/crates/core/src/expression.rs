//! Grouping detections into expression lines and assembling numbers.
//!
//! Lines are found by repeatedly taking the leftmost remaining detection as an
//! anchor and collecting every remaining detection whose vertical center lies
//! within the anchor's top and bottom edges. The band never grows as members
//! join. Within a line, reading order is ascending `x_center`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::{ClassMap, Detection, Symbol};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LexError {
    #[error("malformed number starting at token {position}: {reason}")]
    MalformedNumber { position: usize, reason: &'static str },
}

/// A detected symbol with its position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Token {
    pub kind: Symbol,
    pub x_center: f64,
    pub y_center: f64,
    pub source: Detection,
}

/// Detections of one expression in reading order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionLine {
    pub members: Vec<Detection>,
    /// `(y_min, y_max)` taken from the anchor detection.
    pub y_band: (f64, f64),
}

impl ExpressionLine {
    pub fn tokens(&self, class_map: &ClassMap) -> Vec<Token> {
        tokens_from_detections(&self.members, class_map)
    }
}

/// Reading order: `x_center`, then `y_center`, then class id.
pub fn reading_order(a: &Detection, b: &Detection) -> Ordering {
    a.bbox
        .x_center
        .total_cmp(&b.bbox.x_center)
        .then(a.bbox.y_center.total_cmp(&b.bbox.y_center))
        .then(a.class.cmp(&b.class))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandOptions {
    /// Multiplier on the anchor height; 1.0 uses exactly the anchor's edges.
    pub expansion: f64,
}

impl Default for BandOptions {
    fn default() -> Self {
        BandOptions { expansion: 1.0 }
    }
}

/// Splits one image's detections into expression lines, in the order their
/// anchors are discovered (left to right).
pub fn separate_expressions(dets: &[Detection], opts: &BandOptions) -> Vec<ExpressionLine> {
    let mut remaining = dets.to_vec();
    remaining.sort_by(reading_order);
    let mut lines = Vec::new();
    while let Some(anchor) = remaining.first().copied() {
        let half = 0.5 * anchor.bbox.height * opts.expansion;
        let band = (anchor.bbox.y_center - half, anchor.bbox.y_center + half);
        let (members, rest): (Vec<_>, Vec<_>) = remaining
            .into_iter()
            .partition(|d| band.0 <= d.bbox.y_center && d.bbox.y_center <= band.1);
        remaining = rest;
        lines.push(ExpressionLine { members, y_band: band });
    }
    lines
}

pub fn tokens_from_detections(line: &[Detection], class_map: &ClassMap) -> Vec<Token> {
    let mut sorted = line.to_vec();
    sorted.sort_by(reading_order);
    sorted
        .into_iter()
        .map(|d| Token { kind: class_map.symbol(d.class), x_center: d.bbox.x_center, y_center: d.bbox.y_center, source: d })
        .collect()
}

/// Lexical item after number assembly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexItem {
    /// Exact value plus the digit/dot text it was read from.
    Number { value: BigRational, text: String },
    Add,
    Sub,
    Mul,
    Div,
    LBr,
    RBr,
    Eq,
}

impl LexItem {
    pub fn number(text: &str) -> Option<LexItem> {
        parse_decimal(text).map(|value| LexItem::Number { value, text: text.to_string() })
    }
}

/// Exact value of a decimal literal like `"2.54"`.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if int_part.is_empty() || !all_digits(int_part) || !all_digits(frac_part) || (text.contains('.') && frac_part.is_empty()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let mut denom = BigInt::one();
    for _ in 0..frac_part.len() {
        denom *= 10;
    }
    Some(BigRational::new(digits, denom))
}

fn flush_run(run: &[Symbol], start: usize, out: &mut Vec<LexItem>) -> Result<(), LexError> {
    if run.is_empty() {
        return Ok(());
    }
    let dots: Vec<usize> = run.iter().enumerate().filter(|(_, s)| **s == Symbol::Dot).map(|(i, _)| i).collect();
    if dots.len() > 1 {
        return Err(LexError::MalformedNumber { position: start, reason: "more than one decimal point" });
    }
    if let Some(&d) = dots.first() {
        if d == 0 || d + 1 == run.len() {
            return Err(LexError::MalformedNumber {
                position: start,
                reason: "decimal point must sit between digits",
            });
        }
    }
    let text: String = run.iter().map(|s| s.ascii()).collect();
    let value = parse_decimal(&text).unwrap_or_else(BigRational::zero);
    out.push(LexItem::Number { value, text });
    Ok(())
}

/// Merges maximal digit/dot runs into numbers; other symbols map one-to-one.
pub fn assemble_symbols(symbols: &[Symbol]) -> Result<Vec<LexItem>, LexError> {
    let mut out = Vec::new();
    let mut run: Vec<Symbol> = Vec::new();
    let mut run_start = 0;
    for (i, &s) in symbols.iter().enumerate() {
        if matches!(s, Symbol::Digit(_) | Symbol::Dot) {
            if run.is_empty() {
                run_start = i;
            }
            run.push(s);
            continue;
        }
        flush_run(&run, run_start, &mut out)?;
        run.clear();
        out.push(match s {
            Symbol::Add => LexItem::Add,
            Symbol::Sub => LexItem::Sub,
            Symbol::Mul => LexItem::Mul,
            Symbol::Div => LexItem::Div,
            Symbol::LBr => LexItem::LBr,
            Symbol::RBr => LexItem::RBr,
            Symbol::Eq => LexItem::Eq,
            Symbol::Digit(_) | Symbol::Dot => unreachable!(),
        });
    }
    flush_run(&run, run_start, &mut out)?;
    Ok(out)
}

pub fn assemble_numbers(tokens: &[Token]) -> Result<Vec<LexItem>, LexError> {
    let symbols: Vec<Symbol> = tokens.iter().map(|t| t.kind).collect();
    assemble_symbols(&symbols)
}

/// Expands lex items back into symbols.
pub fn expand_items(items: &[LexItem]) -> Vec<Symbol> {
    let mut out = Vec::new();
    for item in items {
        match item {
            LexItem::Number { text, .. } => {
                out.extend(text.chars().map(|c| Symbol::from_char(c).expect("number text is digits and dots")))
            }
            LexItem::Add => out.push(Symbol::Add),
            LexItem::Sub => out.push(Symbol::Sub),
            LexItem::Mul => out.push(Symbol::Mul),
            LexItem::Div => out.push(Symbol::Div),
            LexItem::LBr => out.push(Symbol::LBr),
            LexItem::RBr => out.push(Symbol::RBr),
            LexItem::Eq => out.push(Symbol::Eq),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BBox, ClassId};

    fn det(class: u8, x: f64, y: f64, h: f64) -> Detection {
        Detection { class: ClassId::new(class).unwrap(), bbox: BBox::new(x, y, 0.05, h).unwrap(), confidence: 1.0 }
    }

    #[test]
    fn single_detection_single_line() {
        let lines = separate_expressions(&[det(1, 0.5, 0.5, 0.1)], &BandOptions::default());
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].members.len(), 1);
        assert!(separate_expressions(&[], &BandOptions::default()).is_empty());
    }

    #[test]
    fn two_rows() {
        let dets = [
            det(1, 0.1, 0.2, 0.1),
            det(2, 0.3, 0.24, 0.1),
            det(3, 0.5, 0.16, 0.1),
            det(4, 0.12, 0.8, 0.1),
            det(5, 0.4, 0.84, 0.1),
        ];
        let lines = separate_expressions(&dets, &BandOptions::default());
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].members.len(), 3);
        assert_eq!(lines[1].members.len(), 2);
    }

    #[test]
    fn band_comes_from_anchor_only() {
        let dets = [det(1, 0.1, 0.5, 0.2), det(2, 0.3, 0.55, 0.5), det(3, 0.5, 0.65, 0.1)];
        let lines = separate_expressions(&dets, &BandOptions::default());
        assert_eq!(lines.len(), 2);
        let xs: Vec<f64> = lines[0].members.iter().map(|d| d.bbox.x_center).collect();
        assert_eq!(xs, [0.1, 0.3]);
        assert_eq!(lines[1].members[0].bbox.y_center, 0.65);
        assert!((lines[0].y_band.0 - 0.4).abs() < 1e-12 && (lines[0].y_band.1 - 0.6).abs() < 1e-12);

        let wide = separate_expressions(&dets, &BandOptions { expansion: 2.0 });
        assert_eq!(wide.len(), 1);
    }

    #[test]
    fn token_order_and_ties() {
        let map = ClassMap::default();
        let t = tokens_from_detections(&[det(1, 0.8, 0.5, 0.1), det(2, 0.2, 0.5, 0.1), det(3, 0.5, 0.5, 0.1)], &map);
        let xs: Vec<f64> = t.iter().map(|t| t.x_center).collect();
        assert_eq!(xs, [0.2, 0.5, 0.8]);
        assert!(tokens_from_detections(&[], &map).is_empty());

        let t = tokens_from_detections(&[det(1, 0.5, 0.6, 0.1), det(2, 0.5, 0.4, 0.1)], &map);
        assert_eq!(t[0].y_center, 0.4);
        assert_eq!(t[0].kind, Symbol::Digit(2));
    }

    fn digits(s: &str) -> Vec<Symbol> {
        crate::model::symbols_from_text(s).unwrap()
    }

    #[test]
    fn number_assembly() {
        let items = assemble_symbols(&digits("21")).unwrap();
        assert_eq!(items, vec![LexItem::number("21").unwrap()]);
        match &assemble_symbols(&digits("2.54")).unwrap()[0] {
            LexItem::Number { value, text } => {
                assert_eq!(value, &BigRational::new(254.into(), 100.into()));
                assert_eq!(text, "2.54");
            }
            other => panic!("{other:?}"),
        }
        let items = assemble_symbols(&digits("(21-15)=")).unwrap();
        assert_eq!(items.len(), 6);
        assert_eq!(items[5], LexItem::Eq);
    }

    #[test]
    fn malformed_numbers() {
        for bad in [".5", "5.", "1.2.3", "3+.5", "1..2"] {
            assert!(
                matches!(assemble_symbols(&digits(bad)), Err(LexError::MalformedNumber { .. })),
                "{bad}"
            );
        }
        assert_eq!(
            assemble_symbols(&digits("3+.5")),
            Err(LexError::MalformedNumber { position: 2, reason: "decimal point must sit between digits" })
        );
    }

    #[test]
    fn decimal_literals() {
        assert_eq!(parse_decimal("007"), Some(BigRational::from_integer(7.into())));
        assert_eq!(parse_decimal("33.2"), Some(BigRational::new(166.into(), 5.into())));
        assert_eq!(parse_decimal(""), None);
        assert_eq!(parse_decimal("1."), None);
        assert_eq!(parse_decimal("1a"), None);
    }
}
