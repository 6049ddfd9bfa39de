//! Synthetic annotated scenes for exercising the pipeline end to end.
//!
//! Expressions are laid out one per horizontal line with per-glyph box sizes,
//! optional geometric jitter (position, size, per-line scaling and baseline
//! skew) and then turned into noisy detections: dropped objects, flipped
//! classes, localization noise and spurious boxes.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{symbols_from_text, BBox, ClassId, ClassMap, Detection, GroundTruthObject, ModelError, Scene, Symbol, NUM_CLASSES};
use crate::parser::{evaluate, BinOp, Expr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("layout does not fit the image: {0}")]
    DoesNotFit(String),
    #[error(transparent)]
    Text(#[from] ModelError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-scene seed: `splitmix64(base ^ splitmix64(index))`.
pub fn mix_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Jitter {
    /// Standard deviation of center displacement, as a fraction of the image.
    pub position: f64,
    /// Standard deviation of width/height perturbation, as a fraction of the image.
    pub size: f64,
}

impl Default for Jitter {
    fn default() -> Self {
        Jitter { position: 0.0, size: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutSpec {
    pub image_width_px: u32,
    pub image_height_px: u32,
    /// Nominal digit box size.
    pub glyph_width: f64,
    pub glyph_height: f64,
    /// Horizontal space between neighbouring glyph boxes.
    pub gap: f64,
    /// Vertical space between lines.
    pub line_gap: f64,
    /// Left and top margin.
    pub margin: f64,
    pub jitter: Jitter,
    /// Per-line independent x and y scale factors drawn from `[1 - s, 1 + s]`.
    pub scale_jitter: f64,
    /// Per-line baseline slope drawn from `[-shear, shear]`.
    pub shear: f64,
    pub seed: u64,
}

impl Default for LayoutSpec {
    fn default() -> Self {
        LayoutSpec {
            image_width_px: 608,
            image_height_px: 608,
            glyph_width: 0.04,
            glyph_height: 0.07,
            gap: 0.008,
            line_gap: 0.04,
            margin: 0.04,
            jitter: Jitter::default(),
            scale_jitter: 0.0,
            shear: 0.0,
            seed: 0,
        }
    }
}

/// Glyph box size relative to a digit.
fn glyph_shape(s: Symbol) -> (f64, f64) {
    match s {
        Symbol::Digit(_) => (1.0, 1.0),
        Symbol::Add | Symbol::Mul | Symbol::Div => (0.8, 0.6),
        Symbol::Sub => (0.8, 0.25),
        Symbol::Eq => (0.8, 0.4),
        Symbol::LBr | Symbol::RBr => (0.5, 1.3),
        Symbol::Dot => (0.3, 0.3),
    }
}

const MAX_SHAPE_HEIGHT: f64 = 1.3;
const MIN_SIZE: f64 = 1e-3;

impl LayoutSpec {
    fn validate(&self) -> Result<(), SynthError> {
        let positive = [self.glyph_width, self.glyph_height];
        let nonneg = [self.gap, self.line_gap, self.margin, self.jitter.position, self.jitter.size, self.shear];
        if positive.iter().any(|v| !(*v > 0.0 && *v <= 1.0))
            || nonneg.iter().any(|v| !(*v >= 0.0 && v.is_finite()))
            || !(0.0..1.0).contains(&self.scale_jitter)
            || self.image_width_px == 0
            || self.image_height_px == 0
        {
            return Err(SynthError::InvalidParameter(format!("layout spec {self:?}")));
        }
        Ok(())
    }

    fn line_width(&self, symbols: &[Symbol]) -> f64 {
        let glyphs: f64 = symbols.iter().map(|s| glyph_shape(*s).0 * self.glyph_width).sum();
        glyphs + self.gap * symbols.len().saturating_sub(1) as f64
    }

    fn line_pitch(&self) -> f64 {
        self.glyph_height * MAX_SHAPE_HEIGHT * (1.0 + self.scale_jitter) + self.line_gap
    }
}

fn normal(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
    } else {
        0.0
    }
}

fn clamp_box(x: f64, y: f64, w: f64, h: f64) -> BBox {
    BBox {
        x_center: x.clamp(0.0, 1.0),
        y_center: y.clamp(0.0, 1.0),
        width: w.clamp(MIN_SIZE, 1.0),
        height: h.clamp(MIN_SIZE, 1.0),
    }
}

/// Lays out each expression on its own line, top to bottom.
pub fn layout_scene(
    image_id: &str,
    expressions: &[String],
    spec: &LayoutSpec,
    class_map: &ClassMap,
) -> Result<Scene, SynthError> {
    spec.validate()?;
    let lines: Vec<Vec<Symbol>> =
        expressions.iter().map(|e| symbols_from_text(e)).collect::<Result<_, _>>()?;

    let widest = lines.iter().map(|l| spec.line_width(l)).fold(0.0, f64::max);
    let needed_w = spec.margin + widest * (1.0 + spec.scale_jitter);
    if needed_w > 1.0 {
        return Err(SynthError::DoesNotFit(format!("widest line needs {needed_w:.4} of the image width")));
    }
    let needed_h = spec.margin + spec.line_pitch() * lines.len() as f64 - spec.line_gap;
    if needed_h > 1.0 {
        return Err(SynthError::DoesNotFit(format!("{} lines need {needed_h:.4} of the image height", lines.len())));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut objects = Vec::new();
    for (i, symbols) in lines.iter().enumerate() {
        let pick = |rng: &mut ChaCha8Rng, s: f64| if s > 0.0 { rng.random_range(-s..=s) } else { 0.0 };
        let sx = 1.0 + pick(&mut rng, spec.scale_jitter);
        let sy = 1.0 + pick(&mut rng, spec.scale_jitter);
        let slope = pick(&mut rng, spec.shear);
        let baseline = spec.margin + spec.line_pitch() * i as f64 + 0.5 * spec.glyph_height * MAX_SHAPE_HEIGHT;
        let mut x = spec.margin;
        for &sym in symbols {
            let (fw, fh) = glyph_shape(sym);
            let w = fw * spec.glyph_width * sx;
            let h = fh * spec.glyph_height * sy;
            let cx = x + 0.5 * w;
            let cy = baseline + slope * (cx - spec.margin);
            x += w + spec.gap * sx;
            let bbox = clamp_box(
                cx + normal(&mut rng, spec.jitter.position),
                cy + normal(&mut rng, spec.jitter.position),
                w + normal(&mut rng, spec.jitter.size),
                h + normal(&mut rng, spec.jitter.size),
            );
            objects.push(GroundTruthObject { class: class_map.class_of(sym), bbox });
        }
    }
    Ok(Scene::new(image_id, spec.image_width_px, spec.image_height_px, objects)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    pub drop_prob: f64,
    /// Expected number of spurious boxes per image.
    pub spurious_rate: f64,
    pub class_flip_prob: f64,
    /// Localization noise standard deviation, as a fraction of the image.
    pub box_noise: f64,
    /// Uniform confidence range for detections of real objects.
    pub tp_confidence: (f64, f64),
    /// Uniform confidence range for spurious detections.
    pub fp_confidence: (f64, f64),
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            drop_prob: 0.05,
            spurious_rate: 0.5,
            class_flip_prob: 0.02,
            box_noise: 0.002,
            tp_confidence: (0.7, 1.0),
            fp_confidence: (0.25, 0.6),
        }
    }
}

impl NoiseSpec {
    /// No noise: every object is detected exactly, with confidence 1.
    pub fn none() -> Self {
        NoiseSpec {
            drop_prob: 0.0,
            spurious_rate: 0.0,
            class_flip_prob: 0.0,
            box_noise: 0.0,
            tp_confidence: (1.0, 1.0),
            fp_confidence: (0.25, 0.6),
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let prob = |v: f64| (0.0..=1.0).contains(&v);
        let band = |(lo, hi): (f64, f64)| prob(lo) && prob(hi) && lo <= hi;
        if !prob(self.drop_prob)
            || !prob(self.class_flip_prob)
            || !(self.spurious_rate >= 0.0 && self.spurious_rate.is_finite())
            || !(self.box_noise >= 0.0 && self.box_noise.is_finite())
            || !band(self.tp_confidence)
            || !band(self.fp_confidence)
        {
            return Err(SynthError::InvalidParameter(format!("noise spec {self:?}")));
        }
        Ok(())
    }
}

fn sample_band(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo < hi {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Simulated detector output for a ground-truth scene.
pub fn perturb(scene: &Scene, noise: &NoiseSpec, seed: u64) -> Result<Vec<Detection>, SynthError> {
    noise.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(scene.objects.len());
    for obj in &scene.objects {
        if noise.drop_prob > 0.0 && rng.random_bool(noise.drop_prob) {
            continue;
        }
        let mut class = obj.class;
        if noise.class_flip_prob > 0.0 && rng.random_bool(noise.class_flip_prob) {
            let shift = rng.random_range(1..NUM_CLASSES) as u8;
            class = ClassId::new((obj.class.index() as u8 + shift) % NUM_CLASSES as u8).expect("in range");
        }
        let b = obj.bbox;
        let bbox = if noise.box_noise > 0.0 {
            clamp_box(
                b.x_center + normal(&mut rng, noise.box_noise),
                b.y_center + normal(&mut rng, noise.box_noise),
                b.width + normal(&mut rng, noise.box_noise),
                b.height + normal(&mut rng, noise.box_noise),
            )
        } else {
            b
        };
        let confidence = sample_band(&mut rng, noise.tp_confidence);
        out.push(Detection { class, bbox, confidence });
    }

    if noise.spurious_rate > 0.0 {
        let count = Poisson::new(noise.spurious_rate).expect("positive rate").sample(&mut rng) as usize;
        for _ in 0..count {
            let (w, h) = if scene.objects.is_empty() {
                (0.04, 0.07)
            } else {
                let o = &scene.objects[rng.random_range(0..scene.objects.len())];
                (o.bbox.width, o.bbox.height)
            };
            let bbox = clamp_box(rng.random::<f64>(), rng.random::<f64>(), w, h);
            let class = ClassId::new(rng.random_range(0..NUM_CLASSES) as u8).expect("in range");
            let confidence = sample_band(&mut rng, noise.fp_confidence);
            out.push(Detection { class, bbox, confidence });
        }
    }
    Ok(out)
}

/// Shape of generated expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExprStyle {
    /// With brackets: height of the operator tree. Without: number of operators.
    pub depth: usize,
    pub allow_decimals: bool,
    pub allow_brackets: bool,
    /// Allow unary minus (only emitted together with brackets).
    pub allow_unary: bool,
    pub min_digits: u32,
    pub max_digits: u32,
}

impl ExprStyle {
    pub fn new(depth: usize, allow_decimals: bool, allow_brackets: bool) -> Self {
        ExprStyle { depth, allow_decimals, allow_brackets, allow_unary: allow_brackets, min_digits: 1, max_digits: 2 }
    }
}

fn random_op(rng: &mut ChaCha8Rng) -> BinOp {
    [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][rng.random_range(0..4)]
}

fn random_number(rng: &mut ChaCha8Rng, style: &ExprStyle, nonzero: bool) -> Expr {
    loop {
        let digits = rng.random_range(style.min_digits.max(1)..=style.max_digits.max(style.min_digits).max(1));
        let mut text = String::new();
        for i in 0..digits {
            let d = if i == 0 && digits > 1 { rng.random_range(1..10) } else { rng.random_range(0..10) };
            text.push(char::from(b'0' + d as u8));
        }
        if style.allow_decimals && rng.random_bool(0.4) {
            text.push('.');
            for _ in 0..rng.random_range(1..=2) {
                text.push(char::from(b'0' + rng.random_range(0..10u8)));
            }
        }
        let value = crate::expression::parse_decimal(&text).expect("generated literal");
        if !nonzero || !value.is_zero() {
            return Expr::Number(value);
        }
    }
}

fn ensure_nonzero_divisor(rng: &mut ChaCha8Rng, style: &ExprStyle, op: BinOp, rhs: Expr) -> Expr {
    if op == BinOp::Div && evaluate(&rhs).map_or(true, |v| v.is_zero()) {
        random_number(rng, style, true)
    } else {
        rhs
    }
}

fn random_tree(rng: &mut ChaCha8Rng, style: &ExprStyle, depth: usize) -> Expr {
    if depth == 0 {
        return random_number(rng, style, false);
    }
    let op = random_op(rng);
    let other = rng.random_range(0..depth);
    let (dl, dr) = if rng.random_bool(0.5) { (depth - 1, other) } else { (other, depth - 1) };
    let lhs = random_tree(rng, style, dl);
    let rhs = random_tree(rng, style, dr);
    let rhs = ensure_nonzero_divisor(rng, style, op, rhs);
    let node = Expr::binary(op, lhs, rhs);
    if style.allow_unary && rng.random_bool(0.08) {
        Expr::negate(node)
    } else {
        node
    }
}

/// Flat operator chain; the divisor of `/` is always a single nonzero number.
fn random_chain(rng: &mut ChaCha8Rng, style: &ExprStyle) -> String {
    let mut text = random_number(rng, style, false).to_string();
    for _ in 0..style.depth.max(1) {
        let op = random_op(rng);
        text.push(op.ascii());
        text.push_str(&random_number(rng, style, op == BinOp::Div).to_string());
    }
    text
}

/// Random well-formed expression generated from a style and an RNG.
pub fn random_expression_with(rng: &mut ChaCha8Rng, style: &ExprStyle) -> String {
    if style.allow_brackets {
        random_tree(rng, style, style.depth.max(1)).to_string()
    } else {
        random_chain(rng, style)
    }
}

/// Random expression text; see [`ExprStyle`] for the meaning of `depth`.
pub fn random_expression(depth: usize, allow_decimals: bool, allow_brackets: bool, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_expression_with(&mut rng, &ExprStyle::new(depth, allow_decimals, allow_brackets))
}

/// Expression families used for generated scenes, from single-digit sums to
/// images holding several expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    SingleDigitSingleOperator,
    SingleDigitMultipleOperators,
    SingleDigitBrackets,
    DoubleDigitSingleOperator,
    DoubleDigitBrackets,
    DecimalNumbers,
    MultipleExpressions,
}

pub const CATEGORIES: [Category; 7] = [
    Category::SingleDigitSingleOperator,
    Category::SingleDigitMultipleOperators,
    Category::SingleDigitBrackets,
    Category::DoubleDigitSingleOperator,
    Category::DoubleDigitBrackets,
    Category::DecimalNumbers,
    Category::MultipleExpressions,
];

fn style(depth: usize, digits: u32, decimals: bool, brackets: bool) -> ExprStyle {
    ExprStyle {
        depth,
        allow_decimals: decimals,
        allow_brackets: brackets,
        allow_unary: false,
        min_digits: digits,
        max_digits: digits,
    }
}

fn bracketed(rng: &mut ChaCha8Rng, s: &ExprStyle) -> String {
    // bounded retries; a bracket-free draw is still a valid expression
    let mut text = random_expression_with(rng, s);
    for _ in 0..32 {
        if text.contains('(') {
            break;
        }
        text = random_expression_with(rng, s);
    }
    text
}

pub fn category_expressions(category: Category, rng: &mut ChaCha8Rng) -> Vec<String> {
    match category {
        Category::SingleDigitSingleOperator => vec![random_expression_with(rng, &style(1, 1, false, false))],
        Category::SingleDigitMultipleOperators => {
            let depth = rng.random_range(2..=3);
            vec![random_expression_with(rng, &style(depth, 1, false, false))]
        }
        Category::SingleDigitBrackets => {
            let depth = rng.random_range(2..=3);
            vec![bracketed(rng, &style(depth, 1, false, true))]
        }
        Category::DoubleDigitSingleOperator => vec![random_expression_with(rng, &style(1, 2, false, false))],
        Category::DoubleDigitBrackets => vec![bracketed(rng, &style(2, 2, false, true))],
        Category::DecimalNumbers => {
            let mut s = style(2, 1, true, true);
            s.max_digits = 2;
            vec![bracketed(rng, &s)]
        }
        Category::MultipleExpressions => (0..3)
            .map(|_| {
                let c = CATEGORIES[rng.random_range(0..CATEGORIES.len() - 1)];
                category_expressions(c, rng).remove(0)
            })
            .collect(),
    }
}

/// A generated scene with its detections.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedScene {
    pub category: Category,
    pub expressions: Vec<String>,
    pub ground_truth: Scene,
    pub detections: Vec<Detection>,
}

/// Scene `index` of a batch: category cycles through [`CATEGORIES`]; layout
/// and noise draw from `mix_seed(base_seed, index)`.
pub fn generate_scene(
    index: u64,
    base_seed: u64,
    layout: &LayoutSpec,
    noise: &NoiseSpec,
    class_map: &ClassMap,
) -> Result<GeneratedScene, SynthError> {
    let seed = mix_seed(base_seed, index);
    let category = CATEGORIES[(index % CATEGORIES.len() as u64) as usize];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = LayoutSpec { seed: splitmix64(seed ^ 1), ..*layout };
    let image_id = format!("scene_{index:05}");
    let mut last_err = None;
    for _ in 0..16 {
        let expressions = category_expressions(category, &mut rng);
        match layout_scene(&image_id, &expressions, &spec, class_map) {
            Ok(ground_truth) => {
                let detections = perturb(&ground_truth, noise, splitmix64(seed ^ 2))?;
                return Ok(GeneratedScene { category, expressions, ground_truth, detections });
            }
            Err(e @ SynthError::DoesNotFit(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("loop ran"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_text;

    fn exprs(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_line_layout() {
        let map = ClassMap::default();
        let scene = layout_scene("s", &exprs(&["2+3"]), &LayoutSpec::default(), &map).unwrap();
        let classes: Vec<usize> = scene.objects.iter().map(|o| o.class.index()).collect();
        assert_eq!(classes, [2, 10, 3]);
        let ys: Vec<f64> = scene.objects.iter().map(|o| o.bbox.y_center).collect();
        assert!(ys.iter().all(|&y| y == ys[0]));
        assert!(scene.objects.windows(2).all(|w| w[0].bbox.x_center < w[1].bbox.x_center));
    }

    #[test]
    fn two_lines_are_disjoint_bands() {
        let map = ClassMap::default();
        let scene = layout_scene("s", &exprs(&["2+3", "9-4"]), &LayoutSpec::default(), &map).unwrap();
        assert_eq!(scene.objects.len(), 6);
        let (a, b) = scene.objects.split_at(3);
        let a_max = a.iter().map(|o| o.bbox.y_max()).fold(f64::MIN, f64::max);
        let b_min = b.iter().map(|o| o.bbox.y_min()).fold(f64::MAX, f64::min);
        assert!(a_max < b_min);
    }

    #[test]
    fn layout_is_deterministic() {
        let map = ClassMap::default();
        let spec = LayoutSpec { jitter: Jitter { position: 0.002, size: 0.002 }, shear: 0.02, scale_jitter: 0.1, seed: 9, ..Default::default() };
        let e = exprs(&["(2.54+5.55)*2", "21-15"]);
        assert_eq!(layout_scene("s", &e, &spec, &map).unwrap(), layout_scene("s", &e, &spec, &map).unwrap());
        let other = LayoutSpec { seed: 10, ..spec };
        assert_ne!(layout_scene("s", &e, &spec, &map).unwrap(), layout_scene("s", &e, &other, &map).unwrap());
    }

    #[test]
    fn oversized_layout_is_rejected() {
        let map = ClassMap::default();
        let long = "1+".repeat(30) + "1";
        assert!(matches!(
            layout_scene("s", &[long], &LayoutSpec::default(), &map),
            Err(SynthError::DoesNotFit(_))
        ));
        let many: Vec<String> = (0..12).map(|_| "1+1".to_string()).collect();
        assert!(matches!(layout_scene("s", &many, &LayoutSpec::default(), &map), Err(SynthError::DoesNotFit(_))));
        assert!(matches!(layout_scene("s", &exprs(&["2^3"]), &LayoutSpec::default(), &map), Err(SynthError::Text(_))));
    }

    #[test]
    fn zero_noise_is_identity() {
        let map = ClassMap::default();
        let scene = layout_scene("s", &exprs(&["(3+7+5)/4"]), &LayoutSpec::default(), &map).unwrap();
        let dets = perturb(&scene, &NoiseSpec::none(), 5).unwrap();
        let expected: Vec<Detection> = scene.objects.iter().map(|o| o.as_detection(1.0)).collect();
        assert_eq!(dets, expected);
    }

    #[test]
    fn full_drop_leaves_only_spurious() {
        let map = ClassMap::default();
        let scene = layout_scene("s", &exprs(&["21-15"]), &LayoutSpec::default(), &map).unwrap();
        let noise = NoiseSpec { drop_prob: 1.0, spurious_rate: 3.0, ..NoiseSpec::default() };
        let mut total = 0;
        for seed in 0..20 {
            let dets = perturb(&scene, &noise, seed).unwrap();
            assert!(dets.iter().all(|d| (0.25..=0.6).contains(&d.confidence)));
            total += dets.len();
        }
        assert!(total > 0);
        let none = NoiseSpec { drop_prob: 1.0, spurious_rate: 0.0, ..NoiseSpec::default() };
        assert!(perturb(&scene, &none, 0).unwrap().is_empty());
    }

    #[test]
    fn invalid_noise_rejected() {
        let scene = Scene::new("s", 10, 10, vec![]).unwrap();
        let bad = NoiseSpec { drop_prob: 1.5, ..NoiseSpec::none() };
        assert!(perturb(&scene, &bad, 0).is_err());
        let bad = NoiseSpec { tp_confidence: (0.9, 0.8), ..NoiseSpec::none() };
        assert!(perturb(&scene, &bad, 0).is_err());
    }

    #[test]
    fn depth_one_is_single_operator() {
        for seed in 0..50 {
            let e = random_expression(1, false, false, seed);
            let ops = e.chars().filter(|c| "+-*/".contains(*c)).count();
            assert_eq!(ops, 1, "{e}");
            assert!(!e.contains('(') && !e.contains('.'));
            assert!(parse_text(&e).is_ok());
        }
    }

    #[test]
    fn generated_expressions_parse() {
        for seed in 0..300 {
            for (d, dec, br) in [(2, true, true), (4, false, true), (3, true, false)] {
                let e = random_expression(d, dec, br, seed);
                assert!(parse_text(&e).is_ok(), "{e}");
            }
        }
    }

    #[test]
    fn seed_mixing_is_spread() {
        assert_ne!(mix_seed(0, 0), mix_seed(0, 1));
        assert_ne!(mix_seed(1, 0), mix_seed(0, 1));
        assert_eq!(mix_seed(42, 7), mix_seed(42, 7));
    }

    #[test]
    fn generated_scenes_cycle_categories() {
        let map = ClassMap::default();
        for i in 0..14 {
            let g = generate_scene(i, 3, &LayoutSpec::default(), &NoiseSpec::none(), &map).unwrap();
            assert_eq!(g.category, CATEGORIES[(i % 7) as usize]);
            let want = if g.category == Category::MultipleExpressions { 3 } else { 1 };
            assert_eq!(g.expressions.len(), want);
        }
    }
}
