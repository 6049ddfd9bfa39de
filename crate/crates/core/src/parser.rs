//! Recursive-descent parsing and exact evaluation of arithmetic expressions.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := NUMBER | '(' expr ')' | '-' factor
//! ```
//!
//! Unary minus is accepted only at the start of the input or directly after
//! `(`. The first `=` ends the expression; anything after it is ignored and
//! counted in [`ParsedExpr::ignored_after_eq`].

use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::expression::{assemble_numbers, assemble_symbols, parse_decimal, ExpressionLine, LexError, LexItem};
use crate::model::{symbols_from_text, ClassMap, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }

    pub fn ascii(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Number(BigRational),
    Neg(Box<Expr>),
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn negate(inner: Expr) -> Expr {
        Expr::Neg(Box::new(inner))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            _ => 3,
        }
    }
}

/// Canonical ASCII text with the fewest brackets that re-parse to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

fn wrap(s: String) -> String {
    format!("({s})")
}

fn render(e: &Expr) -> String {
    match e {
        Expr::Number(v) => exact_decimal(v).unwrap_or_else(|| wrap(format!("{}/{}", v.numer(), v.denom()))),
        Expr::Neg(inner) => {
            let s = render(inner);
            if matches!(**inner, Expr::Binary { .. }) || s.starts_with('-') {
                format!("-{}", wrap(s))
            } else {
                format!("-{s}")
            }
        }
        Expr::Binary { op, lhs, rhs } => {
            let l = render(lhs);
            let l = if lhs.precedence() < op.precedence() { wrap(l) } else { l };
            let r = render(rhs);
            let r = if rhs.precedence() <= op.precedence() || r.starts_with('-') { wrap(r) } else { r };
            format!("{l}{}{r}", op.ascii())
        }
    }
}

/// Terminating decimal text of a rational, or `None` when the expansion
/// does not terminate.
pub fn exact_decimal(v: &BigRational) -> Option<String> {
    let mut den = v.denom().clone();
    let (mut twos, mut fives) = (0u32, 0u32);
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if den != BigInt::from(1) {
        return None;
    }
    let places = twos.max(fives) as usize;
    let scaled = (v * BigRational::from_integer(BigInt::from(10).pow(places as u32))).to_integer();
    Some(format_scaled(&scaled, places))
}

fn format_scaled(scaled: &BigInt, places: usize) -> String {
    let digits = scaled.abs().to_string();
    let sign = if scaled.sign() == Sign::Minus { "-" } else { "" };
    if places == 0 {
        return format!("{sign}{digits}");
    }
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int, frac) = padded.split_at(padded.len() - places);
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// Rounds to at most `places` fractional digits, ties to even, trailing zeros
/// trimmed. Values that round to zero print as `"0"`.
pub fn render_decimal(v: &BigRational, places: u32) -> String {
    let scale = BigRational::from_integer(BigInt::from(10).pow(places));
    let x = v * scale;
    let floor = x.floor();
    let diff = &x - &floor;
    let half = BigRational::new(1.into(), 2.into());
    let mut n = floor.to_integer();
    if diff > half || (diff == half && n.is_odd()) {
        n += 1;
    }
    format_scaled(&n, places as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    EmptyExpression,
    UnbalancedBracket,
    EmptyBrackets,
    AdjacentOperators,
    LeadingOperator,
    TrailingOperator,
    UnexpectedItem,
}

impl fmt::Display for SyntaxErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyntaxErrorKind::EmptyExpression => "empty expression",
            SyntaxErrorKind::UnbalancedBracket => "unbalanced bracket",
            SyntaxErrorKind::EmptyBrackets => "empty brackets",
            SyntaxErrorKind::AdjacentOperators => "adjacent operators",
            SyntaxErrorKind::LeadingOperator => "leading operator",
            SyntaxErrorKind::TrailingOperator => "trailing operator",
            SyntaxErrorKind::UnexpectedItem => "unexpected item",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at item {position}: {kind}")]
pub struct SyntaxError {
    pub position: usize,
    pub kind: SyntaxErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedExpr {
    pub expr: Expr,
    pub had_equals: bool,
    /// Items after the first `=`, which do not take part in evaluation.
    pub ignored_after_eq: usize,
}

struct Parser<'a> {
    items: &'a [LexItem],
    pos: usize,
}

fn is_operator(item: &LexItem) -> bool {
    matches!(item, LexItem::Add | LexItem::Sub | LexItem::Mul | LexItem::Div)
}

impl Parser<'_> {
    fn peek(&self) -> Option<&LexItem> {
        self.items.get(self.pos)
    }

    fn err(&self, kind: SyntaxErrorKind) -> SyntaxError {
        SyntaxError { position: self.pos, kind }
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(LexItem::Add) => BinOp::Add,
                Some(LexItem::Sub) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::binary(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(LexItem::Mul) => BinOp::Mul,
                Some(LexItem::Div) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::binary(op, lhs, self.factor()?);
        }
    }

    fn factor(&mut self) -> Result<Expr, SyntaxError> {
        let unary_ok = self.pos == 0 || self.items[self.pos - 1] == LexItem::LBr;
        match self.peek() {
            Some(LexItem::Number { value, .. }) => {
                let value = value.clone();
                self.pos += 1;
                Ok(Expr::Number(value))
            }
            Some(LexItem::LBr) => {
                self.pos += 1;
                if self.peek() == Some(&LexItem::RBr) {
                    return Err(self.err(SyntaxErrorKind::EmptyBrackets));
                }
                let inner = self.expr()?;
                if self.peek() != Some(&LexItem::RBr) {
                    return Err(match self.peek() {
                        None => self.err(SyntaxErrorKind::UnbalancedBracket),
                        Some(_) => self.err(SyntaxErrorKind::UnexpectedItem),
                    });
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(LexItem::Sub) if unary_ok => {
                self.pos += 1;
                Ok(Expr::negate(self.factor()?))
            }
            Some(item) if is_operator(item) => Err(self.err(if self.pos == 0 {
                SyntaxErrorKind::LeadingOperator
            } else {
                SyntaxErrorKind::AdjacentOperators
            })),
            Some(LexItem::RBr) => Err(self.err(SyntaxErrorKind::UnbalancedBracket)),
            Some(_) => Err(self.err(SyntaxErrorKind::UnexpectedItem)),
            None if self.pos == 0 => Err(self.err(SyntaxErrorKind::EmptyExpression)),
            None if self.items.get(self.pos - 1).is_some_and(is_operator) => {
                Err(SyntaxError { position: self.pos - 1, kind: SyntaxErrorKind::TrailingOperator })
            }
            None => Err(self.err(SyntaxErrorKind::UnexpectedItem)),
        }
    }
}

pub fn parse(items: &[LexItem]) -> Result<ParsedExpr, SyntaxError> {
    let eq = items.iter().position(|i| *i == LexItem::Eq);
    let body = &items[..eq.unwrap_or(items.len())];
    let mut p = Parser { items: body, pos: 0 };
    let expr = p.expr()?;
    if p.pos < body.len() {
        let kind = if body[p.pos] == LexItem::RBr {
            SyntaxErrorKind::UnbalancedBracket
        } else {
            SyntaxErrorKind::UnexpectedItem
        };
        return Err(p.err(kind));
    }
    Ok(ParsedExpr {
        expr,
        had_equals: eq.is_some(),
        ignored_after_eq: eq.map_or(0, |e| items.len() - e - 1),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero: divisor `{divisor}` evaluates to 0")]
    DivisionByZero { divisor: String },
}

pub fn evaluate(e: &Expr) -> Result<BigRational, EvalError> {
    Ok(match e {
        Expr::Number(v) => v.clone(),
        Expr::Neg(inner) => -evaluate(inner)?,
        Expr::Binary { op, lhs, rhs } => {
            let l = evaluate(lhs)?;
            let r = evaluate(rhs)?;
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => {
                    if r.is_zero() {
                        return Err(EvalError::DivisionByZero { divisor: render(rhs) });
                    }
                    l / r
                }
            }
        }
    })
}

pub const RENDER_PLACES: u32 = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalOutcome {
    pub value: BigRational,
    /// Decimal text with at most six fractional digits.
    pub rendering: String,
    pub had_equals: bool,
}

impl EvalOutcome {
    pub fn new(value: BigRational, had_equals: bool) -> Self {
        let rendering = render_decimal(&value, RENDER_PLACES);
        EvalOutcome { value, rendering, had_equals }
    }

    /// Exact value as `p/q`, or `p` for integers.
    pub fn exact(&self) -> String {
        if self.value.is_integer() {
            self.value.numer().to_string()
        } else {
            format!("{}/{}", self.value.numer(), self.value.denom())
        }
    }
}

impl ParsedExpr {
    pub fn evaluate(&self) -> Result<EvalOutcome, EvalError> {
        evaluate(&self.expr).map(|v| EvalOutcome::new(v, self.had_equals))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveErrorKind {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Text(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line in band [{:.6}, {:.6}]: {kind}", y_band.0, y_band.1)]
pub struct SolveError {
    pub y_band: (f64, f64),
    pub kind: SolveErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSolution {
    pub text: String,
    pub outcome: EvalOutcome,
    pub ignored_after_eq: usize,
}

fn solve_items(items: &[LexItem]) -> Result<LineSolution, SolveErrorKind> {
    let parsed = parse(items)?;
    let outcome = parsed.evaluate()?;
    Ok(LineSolution { text: parsed.expr.to_string(), outcome, ignored_after_eq: parsed.ignored_after_eq })
}

/// Number assembly, parsing and evaluation of one expression line.
pub fn solve_line(line: &ExpressionLine, class_map: &ClassMap) -> Result<LineSolution, SolveError> {
    let tag = |kind: SolveErrorKind| SolveError { y_band: line.y_band, kind };
    let items = assemble_numbers(&line.tokens(class_map)).map_err(|e| tag(e.into()))?;
    solve_items(&items).map_err(tag)
}

/// Lexes expression text (ASCII or typographic operators) into items.
pub fn lex_text(text: &str) -> Result<Vec<LexItem>, SolveErrorKind> {
    Ok(assemble_symbols(&symbols_from_text(text)?)?)
}

pub fn parse_text(text: &str) -> Result<ParsedExpr, SolveErrorKind> {
    Ok(parse(&lex_text(text)?)?)
}

/// Solves expression text directly.
pub fn solve_text(text: &str) -> Result<LineSolution, SolveErrorKind> {
    solve_items(&lex_text(text)?)
}

/// Exact rational from a decimal literal; panics on invalid input. For tests
/// and constants.
pub fn rational(text: &str) -> BigRational {
    if let Some((n, d)) = text.split_once('/') {
        let neg = n.starts_with('-');
        let n = parse_decimal(n.trim_start_matches('-')).expect("numerator");
        let v = n / parse_decimal(d).expect("denominator");
        return if neg { -v } else { v };
    }
    let neg = text.starts_with('-');
    let v = parse_decimal(text.trim_start_matches('-')).expect("decimal literal");
    if neg {
        -v
    } else {
        v
    }
}
