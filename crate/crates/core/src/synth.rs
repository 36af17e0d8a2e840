//! Deterministic synthetic handwriting: five stroke styles rendered as
//! binary ink on white, single lines or whole (optionally ruled) pages.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cold::Segment;
use crate::error::{Error, Result};
use crate::raster::{GrayImage, PAPER};

/// Geometry of generated line images, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineGeometry {
    pub width: usize,
    pub height: usize,
    pub baseline: f64,
    pub x_height: f64,
}

impl Default for LineGeometry {
    /// Roughly a full-width line scanned at 300 dpi.
    fn default() -> Self {
        Self {
            width: 2600,
            ..Self::scaled(2.0)
        }
    }
}

impl LineGeometry {
    /// A 520 x 52 line with a 14-pixel x-height, magnified by `k`.
    pub fn scaled(k: f64) -> Self {
        Self {
            width: (520.0 * k) as usize,
            height: (52.0 * k) as usize,
            baseline: 36.0 * k,
            x_height: 14.0 * k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScriptClass {
    /// Block letters of horizontal and vertical bars.
    Straight,
    /// Connected garlands of shallow arcs.
    Cursive,
    /// Strongly forward-leaning diagonals.
    Slanted,
    /// Separate closed ovals.
    Looped,
    /// Vertical stems joined to arcs.
    Mixed,
}

impl ScriptClass {
    pub const ALL: [ScriptClass; 5] = [
        ScriptClass::Straight,
        ScriptClass::Cursive,
        ScriptClass::Slanted,
        ScriptClass::Looped,
        ScriptClass::Mixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScriptClass::Straight => "straight",
            ScriptClass::Cursive => "cursive",
            ScriptClass::Slanted => "slanted",
            ScriptClass::Looped => "looped",
            ScriptClass::Mixed => "mixed",
        }
    }

    fn index(self) -> u64 {
        ScriptClass::ALL.iter().position(|&c| c == self).unwrap_or(0) as u64
    }
}

impl fmt::Display for ScriptClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScriptClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ScriptClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown script class {s:?}")))
    }
}

/// Per-writer habits shared by every line that writer produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Writer {
    /// Shear in degrees; positive leans forward.
    pub slant: f64,
    /// Multiplier on the x-height.
    pub scale: f64,
    pub thickness: f64,
    /// Multiplier on inter-glyph spacing.
    pub spacing: f64,
}

impl Writer {
    pub fn sample(class: ScriptClass, rng: &mut impl Rng) -> Self {
        let slant = match class {
            ScriptClass::Slanted => rng.gen_range(31.0..37.0),
            ScriptClass::Straight => rng.gen_range(-1.5..1.5),
            _ => rng.gen_range(-2.0..6.0),
        };
        Self {
            slant,
            scale: rng.gen_range(0.925..1.075),
            thickness: rng.gen_range(3.85..4.35),
            spacing: rng.gen_range(0.9..1.1),
        }
    }
}

/// A polyline drawn with a round pen.
#[derive(Debug, Clone, PartialEq)]
pub struct Stroke {
    pub points: Vec<[f64; 2]>,
    pub thickness: f64,
}

impl Stroke {
    pub fn segments(&self) -> impl Iterator<Item = Segment<f64>> + '_ {
        self.points.windows(2).map(|w| Segment { a: w[0], b: w[1] })
    }
}

/// Seed for item `index` of `writer` in `class`; splitmix-style mixing so
/// nearby ids give unrelated streams.
fn mix(seed: u64, parts: &[u64]) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for &p in parts {
        h = h.wrapping_add(p).wrapping_add(0x9e37_79b9_7f4a_7c15);
        h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h ^= h >> 31;
    }
    h
}

pub fn writer_for(class: ScriptClass, writer: usize, seed: u64) -> Writer {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, &[class.index(), writer as u64, 0]));
    Writer::sample(class, &mut rng)
}

/// Glyph builder in a local frame: `x` grows right, `y` grows up from the
/// baseline, one unit is one x-height.
struct Pen<'a> {
    strokes: &'a mut Vec<Stroke>,
    origin: [f64; 2],
    unit: f64,
    shear: f64,
    thickness: f64,
}

impl Pen<'_> {
    fn map(&self, [x, y]: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + (x + y * self.shear) * self.unit,
            self.origin[1] - y * self.unit,
        ]
    }

    fn poly(&mut self, pts: &[[f64; 2]]) {
        let points = pts.iter().map(|&p| self.map(p)).collect();
        self.strokes.push(Stroke {
            points,
            thickness: self.thickness,
        });
    }

    /// Elliptical arc sampled about every 1.5 pixels.
    fn arc(&mut self, centre: [f64; 2], radii: [f64; 2], from: f64, to: f64) {
        let span = (to - from).abs() * radii[0].max(radii[1]) * self.unit;
        let n = ((span / 1.5).ceil() as usize).max(4);
        let pts: Vec<[f64; 2]> = (0..=n)
            .map(|i| {
                let t = from + (to - from) * i as f64 / n as f64;
                [centre[0] + radii[0] * t.cos(), centre[1] + radii[1] * t.sin()]
            })
            .collect();
        self.poly(&pts);
    }
}

/// Draws one glyph at the pen origin and returns its advance in x-heights.
fn glyph(class: ScriptClass, pen: &mut Pen<'_>, rng: &mut impl Rng) -> f64 {
    let j = |rng: &mut dyn rand::RngCore, s: f64| rng.gen_range(-s..s);
    match class {
        ScriptClass::Straight => {
            let w = 0.6 + j(rng, 0.1);
            let h = if rng.gen_bool(0.3) { 1.6 } else { 1.0 } + j(rng, 0.05);
            match rng.gen_range(0..6) {
                0 => {
                    pen.poly(&[[0.0, 0.0], [0.0, h]]);
                    pen.poly(&[[w, 0.0], [w, h]]);
                    pen.poly(&[[0.0, h * 0.5], [w, h * 0.5]]);
                }
                1 => {
                    pen.poly(&[[0.0, h], [0.0, 0.0], [w, 0.0]]);
                }
                2 => {
                    pen.poly(&[[0.0, h], [w, h]]);
                    pen.poly(&[[w * 0.5, h], [w * 0.5, 0.0]]);
                }
                3 => {
                    pen.poly(&[[w, h], [0.0, h], [0.0, 0.0], [w, 0.0]]);
                    pen.poly(&[[0.0, h * 0.5], [w * 0.7, h * 0.5]]);
                }
                4 => {
                    pen.poly(&[[0.0, 0.0], [0.0, h], [w, h], [w, 0.0]]);
                }
                _ => {
                    pen.poly(&[[0.0, 0.0], [0.0, h]]);
                    return 0.45;
                }
            }
            w + 0.45
        }
        ScriptClass::Cursive => {
            // A run of shallow cups joined at the top, sometimes a tall loop.
            let cups = rng.gen_range(2..5);
            let mut x = 0.0;
            for _ in 0..cups {
                let r = 0.45 + j(rng, 0.06);
                let depth = 0.32 + j(rng, 0.06);
                pen.arc([x + r, 0.4], [r, depth], PI, 2.0 * PI);
                x += 2.0 * r;
            }
            if rng.gen_bool(0.15) {
                pen.arc([x + 0.2, 1.0], [0.2, 0.6], -0.5 * PI, 1.5 * PI);
                x += 0.4;
            }
            x + 0.5
        }
        ScriptClass::Slanted => {
            let h = if rng.gen_bool(0.25) { 1.5 } else { 1.0 } + j(rng, 0.05);
            match rng.gen_range(0..3) {
                0 => {
                    pen.poly(&[[0.0, 0.0], [0.12, h]]);
                    pen.poly(&[[0.45, 0.0], [0.57, h]]);
                }
                1 => {
                    pen.poly(&[[0.0, 0.0], [0.12, h]]);
                    pen.poly(&[[0.12, h * 0.9], [0.55, 0.0]]);
                }
                _ => {
                    pen.poly(&[[0.0, 0.0], [0.08, h], [0.4, 0.0], [0.48, h]]);
                }
            }
            0.95 + j(rng, 0.1)
        }
        ScriptClass::Looped => {
            let rx = 0.3 + j(rng, 0.06);
            let ry = 0.45 + j(rng, 0.06);
            let start = rng.gen_range(0.0..2.0 * PI);
            pen.arc([rx, ry], [rx, ry], start, start + 1.9 * PI);
            if rng.gen_bool(0.4) {
                pen.poly(&[[2.0 * rx, ry], [2.0 * rx + 0.4, 0.05]]);
            }
            2.0 * rx + 0.4
        }
        ScriptClass::Mixed => {
            let h = if rng.gen_bool(0.5) { 1.6 } else { 1.0 } + j(rng, 0.05);
            let r = 0.3 + j(rng, 0.05);
            pen.poly(&[[0.0, 0.0], [0.0, h]]);
            if rng.gen_bool(0.5) {
                pen.arc([r, 0.6], [r, 0.4], PI, 0.0);
                pen.poly(&[[2.0 * r, 0.6], [2.0 * r, 0.0]]);
            } else {
                pen.arc([r, 0.45], [r, 0.45], 0.5 * PI, -1.5 * PI);
            }
            2.0 * r + 0.5
        }
    }
}

/// Tail below the baseline after a glyph of width `advance`.
fn descender(class: ScriptClass, pen: &mut Pen<'_>, advance: f64) {
    let x = (advance - 0.3).max(0.1);
    match class {
        ScriptClass::Cursive | ScriptClass::Looped => {
            pen.arc([x, -0.3], [0.18, 0.3], 0.5 * PI, 2.3 * PI);
        }
        _ => pen.poly(&[[x, 0.6], [x, -0.55]]),
    }
}

/// Vector strokes of one line starting at `left` with baseline `baseline`,
/// filling up to `right`.
pub fn line_strokes(
    class: ScriptClass,
    writer: &Writer,
    rng: &mut impl Rng,
    left: f64,
    right: f64,
    baseline: f64,
    x_height: f64,
) -> Vec<Stroke> {
    let unit = x_height * writer.scale;
    let shear = writer.slant.to_radians().tan();
    let mut strokes = Vec::new();
    let mut x = left;
    loop {
        let size = unit * rng.gen_range(0.92..1.08);
        let before = strokes.len();
        let mut pen = Pen {
            strokes: &mut strokes,
            origin: [x, baseline + rng.gen_range(-1.0..1.0)],
            unit: size,
            shear,
            thickness: writer.thickness,
        };
        let mut advance = glyph(class, &mut pen, rng);
        if rng.gen_bool(0.12) {
            descender(class, &mut pen, advance);
            advance += 0.3;
        }
        let advance = advance * size * writer.spacing;
        let overflow = strokes[before..]
            .iter()
            .flat_map(|s| &s.points)
            .any(|p| p[0] > right);
        if overflow {
            strokes.truncate(before);
            break;
        }
        x += advance;
        if rng.gen_bool(0.15) {
            x += unit * 0.8;
        }
    }
    strokes
}

fn dist_sq_to_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len = dx * dx + dy * dy;
    let t = if len == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len).clamp(0.0, 1.0)
    };
    let (ex, ey) = (a[0] + t * dx - p[0], a[1] + t * dy - p[1]);
    ex * ex + ey * ey
}

/// Marks every pixel whose centre is within half a pen width of a stroke.
pub fn stroke_mask(width: usize, height: usize, strokes: &[Stroke]) -> Vec<bool> {
    let mut mask = vec![false; width * height];
    for s in strokes {
        let r = s.thickness / 2.0;
        let pts: Vec<[f64; 2]> = if s.points.len() == 1 {
            vec![s.points[0], s.points[0]]
        } else {
            s.points.clone()
        };
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let x0 = (a[0].min(b[0]) - r).floor().max(0.0) as usize;
            let y0 = (a[1].min(b[1]) - r).floor().max(0.0) as usize;
            let x1 = ((a[0].max(b[0]) + r).ceil().max(0.0) as usize).min(width.saturating_sub(1));
            let y1 = ((a[1].max(b[1]) + r).ceil().max(0.0) as usize).min(height.saturating_sub(1));
            for y in y0..=y1 {
                for x in x0..=x1 {
                    if dist_sq_to_segment([x as f64, y as f64], a, b) <= r * r {
                        mask[y * width + x] = true;
                    }
                }
            }
        }
    }
    mask
}

fn mask_to_image(width: usize, height: usize, mask: &[bool]) -> GrayImage {
    let data = mask.iter().map(|&m| if m { 0 } else { PAPER }).collect();
    GrayImage::new(width, height, data).expect("mask matches size")
}

/// One synthetic line and the strokes it was drawn from.
#[derive(Debug, Clone)]
pub struct SynthLine {
    pub class: ScriptClass,
    pub writer: usize,
    pub index: usize,
    pub strokes: Vec<Stroke>,
    pub image: GrayImage,
}

pub fn synth_line(class: ScriptClass, writer: usize, index: usize, seed: u64) -> SynthLine {
    synth_line_with(&LineGeometry::default(), class, writer, index, seed)
}

pub fn synth_line_with(geom: &LineGeometry, class: ScriptClass, writer: usize, index: usize, seed: u64) -> SynthLine {
    let style = writer_for(class, writer, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, &[class.index(), writer as u64, 1 + index as u64]));
    let k = geom.x_height / 14.0;
    let left = rng.gen_range(6.0..20.0) * k;
    let right = geom.width as f64 - rng.gen_range(6.0..40.0) * k;
    let mut style = style;
    style.thickness *= k;
    let strokes = line_strokes(class, &style, &mut rng, left, right, geom.baseline, geom.x_height);
    let (w, h) = (geom.width, geom.height);
    let image = mask_to_image(w, h, &stroke_mask(w, h, &strokes));
    SynthLine {
        class,
        writer,
        index,
        strokes,
        image,
    }
}

/// `per_class` lines for every class, spread round-robin over
/// `writers_per_class` writers.
pub fn corpus(per_class: usize, writers_per_class: usize, seed: u64) -> Vec<SynthLine> {
    corpus_with(&LineGeometry::default(), per_class, writers_per_class, seed)
}

pub fn corpus_with(geom: &LineGeometry, per_class: usize, writers_per_class: usize, seed: u64) -> Vec<SynthLine> {
    let writers = writers_per_class.max(1);
    let geom = *geom;
    ScriptClass::ALL
        .iter()
        .flat_map(move |&class| (0..per_class).map(move |i| synth_line_with(&geom, class, i % writers, i / writers, seed)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageLayout {
    pub width: usize,
    pub lines: usize,
    /// Draw 1-pixel rules every `rule_spacing` rows, text sitting on them.
    pub ruled: bool,
    pub rule_spacing: usize,
}

impl Default for PageLayout {
    fn default() -> Self {
        Self {
            width: 600,
            lines: 3,
            ruled: true,
            rule_spacing: 40,
        }
    }
}

/// A synthetic page together with its construction masks.
#[derive(Debug, Clone)]
pub struct SynthPage {
    pub image: GrayImage,
    pub text_mask: Vec<bool>,
    pub rule_mask: Vec<bool>,
    /// Row span `[start, end)` of each line's ink.
    pub line_spans: Vec<(usize, usize)>,
    pub rule_rows: Vec<usize>,
    pub classes: Vec<ScriptClass>,
}

const PAGE_PEN: f64 = 0.6;

/// Random page: each line has its own class and writer. On ruled pages a
/// line's baseline sits two rows above a rule, so descenders cross it.
pub fn synth_page(layout: &PageLayout, seed: u64) -> Result<SynthPage> {
    if layout.lines == 0 || layout.width < 100 {
        return Err(Error::Config("page needs at least one line and width >= 100".into()));
    }
    if layout.ruled && layout.rule_spacing < 10 {
        return Err(Error::Config("rule spacing must be >= 10".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, &[u64::MAX]));
    let mut baselines = Vec::with_capacity(layout.lines);
    let mut rule_rows = Vec::new();
    let height;
    if layout.ruled {
        let sp = layout.rule_spacing;
        // Leave at least 40 rows between a line's top and the previous line.
        let step_rules = 80usize.div_ceil(sp);
        let first_rule = sp / 2 + rng.gen_range(0..sp) + 30;
        let mut rule_idx = 0usize;
        for _ in 0..layout.lines {
            baselines.push((first_rule + rule_idx * sp) as f64 - 2.0);
            rule_idx += step_rules + rng.gen_range(0..2);
        }
        let last = *baselines.last().expect("non-empty") as usize;
        height = last + 20 + rng.gen_range(0..sp);
        let mut y = first_rule % sp;
        while y < height {
            rule_rows.push(y);
            y += sp;
        }
    } else {
        let mut y = rng.gen_range(30.0..60.0);
        for _ in 0..layout.lines {
            baselines.push(y);
            y += rng.gen_range(52.0..90.0);
        }
        height = (y - 20.0) as usize;
    }

    let w = layout.width;
    let mut text_strokes = Vec::new();
    let mut classes = Vec::with_capacity(layout.lines);
    let mut line_spans = Vec::with_capacity(layout.lines);
    for &baseline in &baselines {
        let class = ScriptClass::ALL[rng.gen_range(0..ScriptClass::ALL.len())];
        let mut style = Writer::sample(class, &mut rng);
        // Page text uses a finer pen than the corpus lines.
        style.thickness *= PAGE_PEN;
        let left = rng.gen_range(8.0..30.0);
        let right = w as f64 - rng.gen_range(8.0..60.0);
        let strokes = line_strokes(class, &style, &mut rng, left, right, baseline, 14.0);
        let mask = stroke_mask(w, height, &strokes);
        let rows: Vec<usize> = (0..height).filter(|&y| mask[y * w..(y + 1) * w].iter().any(|&m| m)).collect();
        if let (Some(&a), Some(&b)) = (rows.first(), rows.last()) {
            line_spans.push((a, b + 1));
        }
        classes.push(class);
        text_strokes.extend(strokes);
    }
    let text_mask = stroke_mask(w, height, &text_strokes);
    let mut rule_mask = vec![false; w * height];
    for &y in &rule_rows {
        rule_mask[y * w..(y + 1) * w].iter_mut().for_each(|m| *m = true);
    }
    let ink: Vec<bool> = text_mask.iter().zip(&rule_mask).map(|(&t, &r)| t || r).collect();
    Ok(SynthPage {
        image: mask_to_image(w, height, &ink),
        text_mask,
        rule_mask,
        line_spans,
        rule_rows,
        classes,
    })
}
