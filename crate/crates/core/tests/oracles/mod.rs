//! Reference implementations used only by tests. They are written
//! independently of the library code they check.

#![allow(dead_code)]

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Axis-aligned box given by corners.
#[derive(Debug, Clone, Copy)]
pub struct Corners {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Corners {
    pub fn from_center(x: f64, y: f64, w: f64, h: f64) -> Self {
        Corners { x0: x - w / 2.0, y0: y - h / 2.0, x1: x + w / 2.0, y1: y + h / 2.0 }
    }
}

fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    let lo = if a0 > b0 { a0 } else { b0 };
    let hi = if a1 < b1 { a1 } else { b1 };
    if hi > lo {
        hi - lo
    } else {
        0.0
    }
}

pub fn corner_iou(a: Corners, b: Corners) -> f64 {
    let inter = overlap(a.x0, a.x1, b.x0, b.x1) * overlap(a.y0, a.y1, b.y0, b.y1);
    if inter == 0.0 {
        return 0.0;
    }
    let area_a = (a.x1 - a.x0) * (a.y1 - a.y0);
    let area_b = (b.x1 - b.x0) * (b.y1 - b.y0);
    inter / (area_a + area_b - inter)
}

/// One image's worth of a small matching instance, all of a single class.
#[derive(Debug, Clone)]
pub struct SmallInstance {
    /// `(confidence, box)`; confidences are distinct.
    pub dets: Vec<(f64, Corners)>,
    pub gts: Vec<Corners>,
}

/// Cumulative TP counts after each detection in descending confidence order,
/// recomputed from scratch for every confidence cut-off.
pub fn cumulative_tp_by_sweep(inst: &SmallInstance, threshold: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..inst.dets.len()).collect();
    order.sort_by(|&a, &b| inst.dets[b].0.partial_cmp(&inst.dets[a].0).unwrap_or(Ordering::Equal));
    let mut out = Vec::new();
    for cut in 1..=order.len() {
        let mut taken = vec![false; inst.gts.len()];
        let mut tp = 0;
        for &d in &order[..cut] {
            let mut best: Option<usize> = None;
            let mut best_iou = -1.0;
            for (g, gt) in inst.gts.iter().enumerate() {
                if taken[g] {
                    continue;
                }
                let v = corner_iou(inst.dets[d].1, *gt);
                if v > best_iou {
                    best_iou = v;
                    best = Some(g);
                }
            }
            if let Some(g) = best {
                if best_iou > threshold {
                    taken[g] = true;
                    tp += 1;
                }
            }
        }
        out.push(tp);
    }
    out
}

/// Algorithm-1 line separation executed step by step as written: sort by x,
/// then repeatedly scan `k = N..1`, prepending members to the current line and
/// deleting them from the list.
///
/// Input items are `(x, y, h, id)`; output is lists of ids.
pub fn algorithm1(items: &[(f64, f64, f64, usize)]) -> Vec<Vec<usize>> {
    let mut list: Vec<(f64, f64, f64, usize)> = items.to_vec();
    // stable insertion sort on x, then y, then id
    for i in 1..list.len() {
        let mut j = i;
        while j > 0 && key(&list[j - 1]) > key(&list[j]) {
            list.swap(j - 1, j);
            j -= 1;
        }
    }
    let mut result = Vec::new();
    let mut n = list.len();
    while n != 0 {
        let y_min = list[0].1 - 0.5 * list[0].2;
        let y_max = list[0].1 + 0.5 * list[0].2;
        let mut eq: Vec<usize> = Vec::new();
        let mut k = n;
        while k >= 1 {
            let item = list[k - 1];
            if y_min <= item.1 && item.1 <= y_max {
                eq.insert(0, item.3);
                let mut rest = list[..k - 1].to_vec();
                rest.extend_from_slice(&list[k..]);
                list = rest;
                n -= 1;
            }
            k -= 1;
        }
        result.push(eq);
    }
    result
}

fn key(t: &(f64, f64, f64, usize)) -> (OrdF, OrdF, usize) {
    (OrdF(t.0), OrdF(t.1), t.3)
}

#[derive(PartialEq, PartialOrd)]
struct OrdF(f64);

/// Reduced fraction over big integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frac {
    pub num: BigInt,
    pub den: BigInt,
}

impl Frac {
    pub fn int(v: i64) -> Frac {
        Frac { num: BigInt::from(v), den: BigInt::one() }
    }

    pub fn new(num: BigInt, den: BigInt) -> Option<Frac> {
        if den.is_zero() {
            return None;
        }
        let g = num.gcd(&den);
        let (mut n, mut d) = (num / &g, den / &g);
        if d.is_negative() {
            n = -n;
            d = -d;
        }
        Some(Frac { num: n, den: d })
    }

    fn add(&self, o: &Frac) -> Frac {
        Frac::new(&self.num * &o.den + &o.num * &self.den, &self.den * &o.den).unwrap()
    }

    fn sub(&self, o: &Frac) -> Frac {
        Frac::new(&self.num * &o.den - &o.num * &self.den, &self.den * &o.den).unwrap()
    }

    fn mul(&self, o: &Frac) -> Frac {
        Frac::new(&self.num * &o.num, &self.den * &o.den).unwrap()
    }

    fn div(&self, o: &Frac) -> Option<Frac> {
        Frac::new(&self.num * &o.den, &self.den * &o.num)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Open,
}

fn prec(op: Op) -> u8 {
    match op {
        Op::Add | Op::Sub => 1,
        Op::Mul | Op::Div => 2,
        Op::Neg => 3,
        Op::Open => 0,
    }
}

fn apply(op: Op, vals: &mut Vec<Frac>) -> Option<()> {
    if op == Op::Neg {
        let v = vals.pop()?;
        vals.push(Frac { num: -v.num, den: v.den });
        return Some(());
    }
    let r = vals.pop()?;
    let l = vals.pop()?;
    vals.push(match op {
        Op::Add => l.add(&r),
        Op::Sub => l.sub(&r),
        Op::Mul => l.mul(&r),
        Op::Div => l.div(&r)?,
        Op::Neg | Op::Open => unreachable!(),
    });
    Some(())
}

/// Shunting-yard evaluation of ASCII expression text over exact fractions.
/// Returns `None` on division by zero or malformed input.
pub fn shunting_yard(text: &str) -> Option<Frac> {
    let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    let mut vals: Vec<Frac> = Vec::new();
    let mut ops: Vec<Op> = Vec::new();
    let mut i = 0;
    let mut expect_operand = true;
    while i < chars.len() {
        let c = chars[i];
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let lit: String = chars[start..i].iter().collect();
            let (int, frac) = lit.split_once('.').unwrap_or((&lit, ""));
            let mut den = BigInt::one();
            for _ in 0..frac.len() {
                den *= 10;
            }
            let num: BigInt = format!("{int}{frac}").parse().ok()?;
            vals.push(Frac::new(num, den)?);
            expect_operand = false;
            continue;
        }
        match c {
            '(' => {
                ops.push(Op::Open);
                expect_operand = true;
            }
            ')' => {
                while let Some(&top) = ops.last() {
                    if top == Op::Open {
                        break;
                    }
                    apply(ops.pop()?, &mut vals)?;
                }
                ops.pop()?;
                expect_operand = false;
            }
            '-' if expect_operand => ops.push(Op::Neg),
            '+' | '-' | '*' | '/' => {
                let op = match c {
                    '+' => Op::Add,
                    '-' => Op::Sub,
                    '*' => Op::Mul,
                    _ => Op::Div,
                };
                while let Some(&top) = ops.last() {
                    if top != Op::Open && prec(top) >= prec(op) {
                        apply(ops.pop()?, &mut vals)?;
                    } else {
                        break;
                    }
                }
                ops.push(op);
                expect_operand = true;
            }
            _ => return None,
        }
        i += 1;
    }
    while let Some(op) = ops.pop() {
        if op == Op::Open {
            return None;
        }
        apply(op, &mut vals)?;
    }
    if vals.len() == 1 {
        vals.pop()
    } else {
        None
    }
}
