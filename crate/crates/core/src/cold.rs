//! Cloud of Line Distribution: every segment pair becomes one `(theta, r)`
//! point, lengths are normalised into a fixed-radius plane.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::contour::SegmentPair;
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::raster::{GrayImage, PAPER};
use crate::scalar::Scalar;

pub const DEFAULT_PLANE_RADIUS: f64 = 150.0;

/// Percentile of segment length mapped onto the plane radius.
pub const LENGTH_PERCENTILE: f64 = 0.99;

/// Segment angle in degrees, `[-90, 90]`, and length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint<T> {
    pub theta: T,
    pub r: T,
}

/// Anything with a direction vector, endpoint `b` minus endpoint `a`.
pub trait SegmentDelta<T> {
    fn delta(&self) -> (T, T);
}

impl<T: Scalar> SegmentDelta<T> for SegmentPair {
    fn delta(&self) -> (T, T) {
        (
            T::of_i64(i64::from(self.b.x - self.a.x)),
            T::of_i64(i64::from(self.b.y - self.a.y)),
        )
    }
}

/// Real-valued segment, for geometry that has not been snapped to pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment<T> {
    pub a: [T; 2],
    pub b: [T; 2],
}

impl<T: Scalar> SegmentDelta<T> for Segment<T> {
    fn delta(&self) -> (T, T) {
        (self.b[0] - self.a[0], self.b[1] - self.a[1])
    }
}

pub fn polar_from_delta<T: Scalar>(dx: T, dy: T) -> Result<PolarPoint<T>> {
    if dx == T::zero() && dy == T::zero() {
        return Err(Error::InvalidSegment("zero-length segment".into()));
    }
    let theta = if dx == T::zero() {
        T::of(90.0)
    } else {
        (dy / dx).atan().to_degrees()
    };
    Ok(PolarPoint {
        theta,
        r: dx.hypot(dy),
    })
}

pub fn to_polar<T: Scalar, S: SegmentDelta<T>>(pair: &S) -> Result<PolarPoint<T>> {
    let (dx, dy) = pair.delta();
    polar_from_delta(dx, dy)
}

/// Length normalisation state of a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum Scale<T> {
    /// No points yet.
    #[default]
    Unset,
    /// Every point was scaled by this factor.
    Uniform(T),
    /// Points from differently scaled sources.
    Mixed,
}

impl<T: Scalar> Scale<T> {
    fn combine(self, other: Self) -> Self {
        match (self, other) {
            (Scale::Unset, s) | (s, Scale::Unset) => s,
            (Scale::Uniform(a), Scale::Uniform(b)) if a == b => Scale::Uniform(a),
            _ => Scale::Mixed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColdDistribution<T> {
    points: Vec<PolarPoint<T>>,
    plane_radius: T,
    scale: Scale<T>,
}

impl<T: Scalar> ColdDistribution<T> {
    pub fn empty(plane_radius: T) -> Self {
        Self {
            points: Vec::new(),
            plane_radius,
            scale: Scale::Unset,
        }
    }

    /// Normalises raw polar points so the length percentile lands on the
    /// plane radius, clamping the longer outliers to the radius.
    pub fn from_raw(raw: Vec<PolarPoint<T>>, plane_radius: T) -> Result<Self> {
        check_radius(plane_radius)?;
        if raw.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let mut lengths: Vec<T> = raw.iter().map(|p| p.r).collect();
        lengths.sort_by(|a, b| a.partial_cmp(b).expect("finite lengths"));
        let rank = (LENGTH_PERCENTILE * lengths.len() as f64).ceil() as usize;
        let reference = lengths[rank.clamp(1, lengths.len()) - 1];
        if !(reference > T::zero()) {
            return Err(Error::InvalidSegment("non-positive reference length".into()));
        }
        let points = raw
            .into_iter()
            .map(|p| PolarPoint {
                theta: p.theta,
                r: ((p.r / reference) * plane_radius).min(plane_radius),
            })
            .collect();
        Ok(Self {
            points,
            plane_radius,
            scale: Scale::Uniform(plane_radius / reference),
        })
    }

    /// Already-normalised points, e.g. read back from a dump.
    pub fn from_scaled(points: Vec<PolarPoint<T>>, plane_radius: T, scale: Scale<T>) -> Result<Self> {
        check_radius(plane_radius)?;
        for p in &points {
            if !(p.r >= T::zero() && p.r <= plane_radius) {
                return Err(Error::InvalidInput(format!(
                    "point radius {} outside [0, {plane_radius}]",
                    p.r
                )));
            }
            if !(p.theta >= T::of(-90.0) && p.theta <= T::of(90.0)) {
                return Err(Error::InvalidInput(format!("angle {} outside [-90, 90]", p.theta)));
            }
        }
        Ok(Self {
            points,
            plane_radius,
            scale,
        })
    }

    pub fn points(&self) -> &[PolarPoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn plane_radius(&self) -> T {
        self.plane_radius
    }

    pub fn scale(&self) -> Scale<T> {
        self.scale
    }

    /// Plain text dump: a `plane_radius=<n>` header, then one
    /// `theta_degrees,r_units` line per point.
    pub fn to_dump_string(&self) -> String {
        let mut s = format!("plane_radius={}\n", self.plane_radius);
        for p in &self.points {
            let _ = writeln!(s, "{},{}", p.theta, p.r);
        }
        s
    }

    pub fn from_dump_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty distribution dump".into()))?;
        let radius = header
            .trim()
            .strip_prefix("plane_radius=")
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| Error::Parse(format!("bad header `{header}`")))?;
        let mut points = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parsed = line.split_once(',').and_then(|(a, b)| {
                Some(PolarPoint {
                    theta: T::of(a.trim().parse::<f64>().ok()?),
                    r: T::of(b.trim().parse::<f64>().ok()?),
                })
            });
            points.push(parsed.ok_or_else(|| Error::Parse(format!("line {}: `{line}`", n + 2)))?);
        }
        let scale = if points.is_empty() {
            Scale::Unset
        } else {
            Scale::Mixed
        };
        Self::from_scaled(points, T::of(radius), scale)
    }
}

fn check_radius<T: Scalar>(radius: T) -> Result<()> {
    if !(radius >= T::one()) || !radius.is_finite() {
        return Err(Error::Config(format!("plane radius must be >= 1, got {radius}")));
    }
    Ok(())
}

/// Converts every pair and normalises lengths into the plane.
pub fn build_distribution<T: Scalar, S: SegmentDelta<T>>(pairs: &[S], plane_radius: T) -> Result<ColdDistribution<T>> {
    let raw = pairs.iter().map(to_polar).collect::<Result<Vec<_>>>()?;
    ColdDistribution::from_raw(raw, plane_radius)
}

/// Multiset union of two distributions on the same plane.
pub fn merge<T: Scalar>(a: &ColdDistribution<T>, b: &ColdDistribution<T>) -> Result<ColdDistribution<T>> {
    if a.plane_radius != b.plane_radius {
        return Err(Error::Config(format!(
            "cannot merge distributions with plane radii {} and {}",
            a.plane_radius, b.plane_radius
        )));
    }
    let mut points = Vec::with_capacity(a.len() + b.len());
    points.extend_from_slice(&a.points);
    points.extend_from_slice(&b.points);
    Ok(ColdDistribution {
        points,
        plane_radius: a.plane_radius,
        scale: a.scale.combine(b.scale),
    })
}

pub const AXIS_LEVEL: u8 = 160;
pub const MARK_LEVEL: u8 = 0;

/// Scatter plot on a `(2R+1)^2` canvas: axes through the centre in grey,
/// each point as a 3x3 black mark at `(r cos theta, r sin theta)` with the
/// y axis pointing up.
pub fn render_image<T: Scalar>(d: &ColdDistribution<T>) -> GrayImage {
    let radius = d.plane_radius.round().to_usize().unwrap_or(0);
    let side = 2 * radius + 1;
    let mut img = GrayImage::blank(side, side);
    for i in 0..side {
        img.set(i, radius, AXIS_LEVEL);
        img.set(radius, i, AXIS_LEVEL);
    }
    let c = radius as i64;
    for p in &d.points {
        let rad = p.theta.to_radians();
        let x = c + (p.r * rad.cos()).round().to_i64().unwrap_or(0);
        let y = c - (p.r * rad.sin()).round().to_i64().unwrap_or(0);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (px, py) = (x + dx, y + dy);
                if px >= 0 && py >= 0 && (px as usize) < side && (py as usize) < side {
                    img.set(px as usize, py as usize, MARK_LEVEL);
                }
            }
        }
    }
    debug_assert!(img.data().iter().all(|&v| v == PAPER || v == AXIS_LEVEL || v == MARK_LEVEL));
    img
}

pub fn render_plot<T: Scalar>(d: &ColdDistribution<T>, path: &Path) -> Result<()> {
    write_atomic(path, &render_image(d).to_png_bytes()?)
}
