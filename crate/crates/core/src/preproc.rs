//! Page preprocessing: grayscale conversion, horizontal projection profile,
//! baseline and rule-line removal, and text-line segmentation.
//!
//! Profiles are computed on inverted intensities (`255 - v`) so that ink is
//! high-valued; stored images keep the usual dark-on-light polarity.

use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::contour::{canny_edges, CannyParams, EdgeMap, NEIGHBOURS};
use crate::error::{Error, Result};
use crate::raster::{GrayImage, Pixel, PAPER};

const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// Baseline tangents are read from the nearest edge pixel within this many
/// rows of the tested pixel; Canny places the edges of a thin rule on the
/// rows beside it, not on the rule itself.
pub const TANGENT_REACH: i32 = 2;

/// Pixels darker than this count as ink when measuring stroke thickness.
pub const INK_LEVEL: u8 = 192;

pub fn to_grayscale(image: &RgbImage) -> Result<GrayImage> {
    let (w, h) = image.dimensions();
    if w == 0 || h == 0 {
        return Err(Error::InvalidInput("image has zero width or height".into()));
    }
    let data = image
        .pixels()
        .map(|p| {
            let v = LUMA[0] * f64::from(p[0]) + LUMA[1] * f64::from(p[1]) + LUMA[2] * f64::from(p[2]);
            v.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage::new(w as usize, h as usize, data)
}

/// Mean inverted intensity per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowProfile {
    pub values: Vec<f64>,
}

impl RowProfile {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

pub fn ink_profile(img: &GrayImage) -> RowProfile {
    let n = img.width().max(1) as f64;
    let values = (0..img.height())
        .map(|y| {
            let sum: u64 = img.row(y).iter().map(|&v| u64::from(PAPER - v)).sum();
            sum as f64 / n
        })
        .collect();
    RowProfile { values }
}

/// Angle in degrees, in `[-90, 90]`, between `p` and its first edge neighbour
/// in clockwise Moore order. `None` when `p` is not an edge pixel or has no
/// edge neighbour.
pub fn contour_tangent(edges: &EdgeMap, p: Pixel) -> Option<f64> {
    if !edges.is_edge(p.x, p.y) {
        return None;
    }
    let (dx, dy) = NEIGHBOURS
        .iter()
        .copied()
        .find(|(dx, dy)| edges.is_edge(p.x + dx, p.y + dy))?;
    Some(slope_angle(f64::from(dx), f64::from(dy)))
}

/// `atan(dy/dx)` in degrees with `dx == 0` mapped to 90.
pub(crate) fn slope_angle(dx: f64, dy: f64) -> f64 {
    if dx == 0.0 {
        90.0
    } else {
        (dy / dx).atan().to_degrees()
    }
}

/// Tangents of edge pixels near `(x, y)` in the same column, nearest first.
fn local_tangents(edges: &EdgeMap, x: i32, y: i32) -> impl Iterator<Item = f64> + '_ {
    std::iter::once(0)
        .chain((1..=TANGENT_REACH).flat_map(|d| [-d, d]))
        .filter_map(move |dy| contour_tangent(edges, Pixel::new(x, y + dy)))
}

/// Whether any edge pixel in the same column within reach runs within
/// `angle_thresh` degrees of horizontal. Text resting on a rule hides the
/// rule's upper edge, so the lower one must count too.
fn near_horizontal(edges: &EdgeMap, x: i32, y: i32, angle_thresh: f64) -> bool {
    local_tangents(edges, x, y).any(|phi| phi.abs() < angle_thresh)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineParams {
    pub hpp_thresh: f64,
    pub angle_thresh: f64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            hpp_thresh: 200.0,
            angle_thresh: 10.0,
        }
    }
}

impl BaselineParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=255.0).contains(&self.hpp_thresh) {
            return Err(Error::Config(format!(
                "hpp threshold must lie in [0, 255], got {}",
                self.hpp_thresh
            )));
        }
        if !(0.0..=90.0).contains(&self.angle_thresh) {
            return Err(Error::Config(format!(
                "angle threshold must lie in [0, 90] degrees, got {}",
                self.angle_thresh
            )));
        }
        Ok(())
    }
}

/// Blanks pixels on high-profile rows whose local edge tangent is near
/// horizontal. All other pixels are copied unchanged.
pub fn remove_baselines(
    img: &GrayImage,
    edges: &EdgeMap,
    profile: &RowProfile,
    params: &BaselineParams,
) -> Result<GrayImage> {
    params.validate()?;
    if profile.len() != img.height() || edges.width() != img.width() || edges.height() != img.height() {
        return Err(Error::InvalidInput(
            "profile and edge map must match the image dimensions".into(),
        ));
    }
    let mut out = img.clone();
    for (y, &v) in profile.values.iter().enumerate() {
        if v <= params.hpp_thresh {
            continue;
        }
        for x in 0..img.width() {
            if img.get(x, y) == PAPER {
                continue;
            }
            if near_horizontal(edges, x as i32, y as i32, params.angle_thresh) {
                out.set(x, y, PAPER);
            }
        }
    }
    Ok(out)
}

/// A segmented text line and the page rows it was cut from.
#[derive(Debug, Clone, PartialEq)]
pub struct TextLine {
    pub y_start: usize,
    pub y_end: usize,
    pub crop: GrayImage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentParams {
    /// Rows above this fraction of the profile maximum carry text.
    pub valley_frac: f64,
    /// Text runs separated by fewer blank rows are merged, and runs shorter
    /// than this join their nearest neighbour.
    pub min_gap: usize,
    /// Rows of context added above and below each run.
    pub pad: usize,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self {
            valley_frac: 0.05,
            min_gap: 8,
            pad: 2,
        }
    }
}

impl SegmentParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.valley_frac) {
            return Err(Error::Config(format!(
                "valley fraction must lie in [0, 1), got {}",
                self.valley_frac
            )));
        }
        Ok(())
    }
}

/// Horizontal projection profile segmentation into top-to-bottom lines.
///
/// Spans are the text row runs widened by `pad` rows on each side (clamped
/// to the page and to the midpoint of the gap between neighbouring runs),
/// so a crop always equals its span and spans never overlap.
pub fn segment_lines(img: &GrayImage, profile: &RowProfile, params: &SegmentParams) -> Result<Vec<TextLine>> {
    params.validate()?;
    if profile.len() != img.height() {
        return Err(Error::InvalidInput("profile length must equal image height".into()));
    }
    let max = profile.max();
    if max <= 0.0 {
        return Ok(Vec::new());
    }
    let thresh = params.valley_frac * max;

    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for (y, &v) in profile.values.iter().enumerate() {
        match (v > thresh, start) {
            (true, None) => start = Some(y),
            (false, Some(s)) => {
                runs.push((s, y));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, profile.len()));
    }

    let mut merged: Vec<(usize, usize)> = Vec::with_capacity(runs.len());
    for run in runs {
        match merged.last_mut() {
            Some(last) if run.0 - last.1 < params.min_gap => last.1 = run.1,
            _ => merged.push(run),
        }
    }
    // Slivers shorter than `min_gap` (isolated ascender tips, specks) join
    // the closer neighbouring run.
    while merged.len() > 1 {
        let Some(i) = merged.iter().position(|r| r.1 - r.0 < params.min_gap) else {
            break;
        };
        let gap_before = (i > 0).then(|| merged[i].0 - merged[i - 1].1);
        let gap_after = merged.get(i + 1).map(|r| r.0 - merged[i].1);
        let into = match (gap_before, gap_after) {
            (Some(b), Some(a)) if a < b => i + 1,
            (Some(_), _) => i - 1,
            _ => i + 1,
        };
        let (lo, hi) = (i.min(into), i.max(into));
        merged[lo] = (merged[lo].0, merged[hi].1);
        merged.remove(hi);
    }

    let n = merged.len();
    Ok((0..n)
        .map(|i| {
            let (s, e) = merged[i];
            // Padding never reaches past the middle of the gap to a neighbour.
            let floor = if i > 0 { (merged[i - 1].1 + s).div_ceil(2) } else { 0 };
            let ceil = if i + 1 < n { (e + merged[i + 1].0).div_ceil(2) } else { img.height() };
            let y_start = s.saturating_sub(params.pad).max(floor.min(s));
            let y_end = (e + params.pad).min(ceil.max(e));
            TextLine {
                y_start,
                y_end,
                crop: img.crop_rows(y_start, y_end),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleParams {
    /// Minimum fraction of the line width a near-horizontal edge run must span.
    pub ruled_frac: f64,
    pub angle_thresh: f64,
    /// Thickest rule, in rows, that is erased.
    pub max_thickness: usize,
}

impl Default for RuleParams {
    fn default() -> Self {
        Self {
            ruled_frac: 0.6,
            angle_thresh: 10.0,
            max_thickness: 3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RuleStats {
    /// Rows of the crop holding a detected rule.
    pub rule_rows: Vec<usize>,
    pub erased_pixels: usize,
}

fn horizontal_edge(edges: &EdgeMap, x: i32, y: i32, angle_thresh: f64) -> bool {
    contour_tangent(edges, Pixel::new(x, y)).is_some_and(|phi| phi.abs() < angle_thresh)
}

/// Finds rows where near-horizontal edge pixels (tolerating one row of
/// drift) cover at least `ruled_frac` of the width. Returns each row with
/// the column interval from its first to its last hit.
fn rule_rows(edges: &EdgeMap, params: &RuleParams) -> Vec<(usize, usize, usize)> {
    let w = edges.width();
    let need = (params.ruled_frac * w as f64).ceil().max(1.0) as usize;
    let mut found = Vec::new();
    for y in 0..edges.height() as i32 {
        let hits: Vec<usize> = (0..w)
            .filter(|&x| (-1..=1).any(|dy| horizontal_edge(edges, x as i32, y + dy, params.angle_thresh)))
            .collect();
        if hits.len() >= need {
            found.push((y as usize, hits[0], hits[hits.len() - 1] + 1));
        }
    }
    found
}

/// Erases the ink rows of each detected rule. Rule pixels stay only where a
/// stroke continues both above and below the rule.
pub fn remove_rule_lines_with_stats(
    line: &TextLine,
    edges: &EdgeMap,
    params: &RuleParams,
) -> (TextLine, RuleStats) {
    let img = &line.crop;
    let (w, h) = (img.width(), img.height());
    let mut out = img.clone();
    let mut stats = RuleStats::default();
    if edges.width() != w || edges.height() != h {
        return (line.clone(), stats);
    }
    let is_ink = |x: usize, y: usize| img.get(x, y) < INK_LEVEL;
    let need = (params.ruled_frac * w as f64).ceil().max(1.0) as usize;
    // Longest horizontal ink run of a row, as [start, end).
    let longest_run = |y: usize| {
        let (mut best, mut start) = ((0, 0), None);
        for x in 0..=w {
            match (x < w && is_ink(x, y), start) {
                (true, None) => start = Some(x),
                (false, Some(s)) => {
                    if x - s > best.1 - best.0 {
                        best = (s, x);
                    }
                    start = None;
                }
                _ => {}
            }
        }
        best
    };

    let mut bands: Vec<(usize, usize, usize, usize)> = Vec::new();
    for (y, _, _) in rule_rows(edges, params) {
        // The rule itself is an unbroken ink row next to the edge row;
        // connected handwriting has word gaps.
        let rows: Vec<(usize, (usize, usize))> = (y.saturating_sub(TANGENT_REACH as usize)..=(y + TANGENT_REACH as usize).min(h - 1))
            .map(|r| (r, longest_run(r)))
            .filter(|(_, (a, b))| b - a >= need)
            .collect();
        let Some(&(top, _)) = rows.first() else {
            continue;
        };
        let bottom = rows.last().unwrap().0;
        if bottom - top + 1 > params.max_thickness || bottom - top + 1 != rows.len() {
            continue;
        }
        let x0 = rows.iter().map(|(_, (a, _))| *a).min().unwrap();
        let x1 = rows.iter().map(|(_, (_, b))| *b).max().unwrap();
        if !bands.contains(&(top, bottom, x0, x1)) {
            bands.push((top, bottom, x0, x1));
        }
    }
    for &(top, bottom, x0, x1) in &bands {
        stats.rule_rows.extend(top..=bottom);
        for x in x0..x1 {
            let above = top > 0 && is_ink(x, top - 1);
            let below = bottom + 1 < h && is_ink(x, bottom + 1);
            if above && below {
                continue;
            }
            for y in top..=bottom {
                if out.get(x, y) != PAPER {
                    out.set(x, y, PAPER);
                    stats.erased_pixels += 1;
                }
            }
        }
    }
    stats.rule_rows.sort_unstable();
    stats.rule_rows.dedup();
    (
        TextLine {
            y_start: line.y_start,
            y_end: line.y_end,
            crop: out,
        },
        stats,
    )
}

pub fn remove_rule_lines(line: &TextLine, edges: &EdgeMap, params: &RuleParams) -> TextLine {
    remove_rule_lines_with_stats(line, edges, params).0
}

/// Every preprocessing tunable.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PreprocessParams {
    pub baseline: BaselineParams,
    pub segment: SegmentParams,
    pub rule: RuleParams,
    pub canny: CannyParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessedPage {
    /// Page after baseline removal.
    pub cleaned: GrayImage,
    /// Segmented lines after rule-line removal.
    pub lines: Vec<TextLine>,
    pub baseline_pixels: usize,
    pub rule_stats: Vec<RuleStats>,
}

impl PreprocessedPage {
    /// The cleaned page with every line's rows replaced by its final crop.
    pub fn composite(&self) -> GrayImage {
        let mut out = self.cleaned.clone();
        for line in &self.lines {
            for y in 0..line.crop.height() {
                for x in 0..line.crop.width() {
                    out.set(x, line.y_start + y, line.crop.get(x, y));
                }
            }
        }
        out
    }
}

/// Baseline removal, segmentation and per-line rule removal.
pub fn preprocess_page(img: &GrayImage, params: &PreprocessParams) -> Result<PreprocessedPage> {
    if img.is_empty() {
        return Err(Error::InvalidInput("image has zero width or height".into()));
    }
    let edges = canny_edges(img, &params.canny)?;
    let profile = ink_profile(img);
    let cleaned = remove_baselines(img, &edges, &profile, &params.baseline)?;
    let baseline_pixels = img
        .data()
        .iter()
        .zip(cleaned.data())
        .filter(|(a, b)| a != b)
        .count();
    let segmented = segment_lines(&cleaned, &ink_profile(&cleaned), &params.segment)?;
    let mut lines = Vec::with_capacity(segmented.len());
    let mut rule_stats = Vec::with_capacity(segmented.len());
    for line in &segmented {
        let edges = canny_edges(&line.crop, &params.canny)?;
        let (clean, stats) = remove_rule_lines_with_stats(line, &edges, &params.rule);
        lines.push(clean);
        rule_stats.push(stats);
    }
    Ok(PreprocessedPage {
        cleaned,
        lines,
        baseline_pixels,
        rule_stats,
    })
}
