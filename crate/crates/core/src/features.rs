//! Principal-axis distance features of a rasterised distribution.
//!
//! The distribution is plotted into a binary image, its principal axis is
//! found with PCA, and from every axis position the image is scanned
//! perpendicularly on both sides. The first ink hit on the left (LD) and
//! on the right (RD) gives one `|LD - RD|` record; records are binned along
//! the axis into a fixed-length vector.

use serde::{Deserialize, Serialize};

use crate::cold::ColdDistribution;
use crate::error::{Error, Result};
use crate::raster::GrayImage;
use crate::scalar::Scalar;

pub const DEFAULT_BINS: usize = 64;

/// Square binary raster centred on the polar origin. Coordinates are
/// Cartesian: `x` to the right, `y` up, both in `[-radius, radius]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColdRaster {
    radius: usize,
    bits: Vec<bool>,
}

impl ColdRaster {
    pub fn new(radius: usize) -> Self {
        let side = 2 * radius + 1;
        Self {
            radius,
            bits: vec![false; side * side],
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    #[inline]
    fn index(&self, x: i64, y: i64) -> Option<usize> {
        let r = self.radius as i64;
        if x.abs() > r || y.abs() > r {
            return None;
        }
        Some(((r - y) as usize) * self.side() + (r + x) as usize)
    }

    #[inline]
    pub fn get(&self, x: i64, y: i64) -> bool {
        self.index(x, y).is_some_and(|i| self.bits[i])
    }

    #[inline]
    pub fn contains(&self, x: i64, y: i64) -> bool {
        self.index(x, y).is_some()
    }

    /// Sets a pixel; out-of-range coordinates are ignored.
    pub fn set(&mut self, x: i64, y: i64, on: bool) {
        if let Some(i) = self.index(x, y) {
            self.bits[i] = on;
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Set pixels in Cartesian coordinates, top row first.
    pub fn set_pixels(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let side = self.side();
        let r = self.radius as i64;
        self.bits
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b)
            .map(move |(i, _)| ((i % side) as i64 - r, r - (i / side) as i64))
    }

    /// Ink rendering, set pixels black on white.
    pub fn to_gray(&self) -> GrayImage {
        let data = self.bits.iter().map(|&b| if b { 0 } else { 255 }).collect();
        GrayImage::new(self.side(), self.side(), data).expect("square raster")
    }
}

pub fn rasterize<T: Scalar>(d: &ColdDistribution<T>) -> ColdRaster {
    let radius = d.plane_radius().round().to_usize().unwrap_or(0);
    let mut raster = ColdRaster::new(radius);
    for p in d.points() {
        let rad = p.theta.to_radians();
        let x = (p.r * rad.cos()).round().to_i64().unwrap_or(0);
        let y = (p.r * rad.sin()).round().to_i64().unwrap_or(0);
        raster.set(x, y, true);
    }
    raster
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrincipalAxis<T> {
    pub centroid: [T; 2],
    /// Unit vector with `x >= 0`, and `y >= 0` when `x == 0`.
    pub direction: [T; 2],
}

impl<T: Scalar> PrincipalAxis<T> {
    pub fn new(centroid: [T; 2], direction: [T; 2]) -> Result<Self> {
        let norm = direction[0].hypot(direction[1]);
        if !(norm > T::zero()) {
            return Err(Error::InvalidInput("axis direction must be non-zero".into()));
        }
        let mut d = [direction[0] / norm, direction[1] / norm];
        if d[0] < T::zero() || (d[0] == T::zero() && d[1] < T::zero()) {
            d = [-d[0], -d[1]];
        }
        Ok(Self {
            centroid,
            direction: d,
        })
    }

    /// Same axis, opposite orientation (sign convention not applied).
    pub fn reversed(&self) -> Self {
        Self {
            centroid: self.centroid,
            direction: [-self.direction[0], -self.direction[1]],
        }
    }
}

/// Dominant eigenvector of the set-pixel covariance, through the centroid.
///
/// Moments are accumulated in integers so that mirror-symmetric rasters
/// produce exactly symmetric axes.
pub fn principal_axis<T: Scalar>(raster: &ColdRaster) -> Result<PrincipalAxis<T>> {
    let (mut n, mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0i128, 0i128, 0i128, 0i128, 0i128, 0i128);
    for (x, y) in raster.set_pixels() {
        let (x, y) = (i128::from(x), i128::from(y));
        n += 1;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    if n < 2 {
        return Err(Error::DegenerateDistribution(format!("{n} set pixel(s)")));
    }
    // n^2 times the covariance; same eigenvectors.
    let a = n * sxx - sx * sx;
    let c = n * syy - sy * sy;
    let b = n * sxy - sx * sy;
    if a == 0 && c == 0 {
        return Err(Error::DegenerateDistribution("zero covariance".into()));
    }
    let to = |v: i128| T::from_i128(v).expect("i128 converts to Scalar");
    let direction = if b == 0 {
        if a >= c {
            [T::one(), T::zero()]
        } else {
            [T::zero(), T::one()]
        }
    } else if a == c {
        let h = T::FRAC_1_SQRT_2();
        [h, if b > 0 { h } else { -h }]
    } else {
        let (a, b, c) = (to(a), to(b), to(c));
        let two = T::of(2.0);
        let half_gap = (a - c) / two;
        let lambda = (a + c) / two + half_gap.hypot(b);
        let v1 = [lambda - c, b];
        let v2 = [b, lambda - a];
        if v1[0].hypot(v1[1]) >= v2[0].hypot(v2[1]) {
            v1
        } else {
            v2
        }
    };
    PrincipalAxis::new([to(sx) / to(n), to(sy) / to(n)], direction)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord<T> {
    /// Signed step along the axis from the centroid.
    pub t: T,
    pub ld: T,
    pub rd: T,
    pub diff: T,
}

fn first_hit<T: Scalar>(raster: &ColdRaster, origin: [T; 2], step: [T; 2]) -> Option<usize> {
    let mut s = 1usize;
    loop {
        let k = T::of_usize(s);
        let x = (origin[0] + k * step[0]).round().to_i64()?;
        let y = (origin[1] + k * step[1]).round().to_i64()?;
        if !raster.contains(x, y) {
            return None;
        }
        if raster.get(x, y) {
            return Some(s);
        }
        s += 1;
    }
}

/// Perpendicular scans from every integer axis position inside the raster.
/// A record is kept only when ink is found on both sides; the first hit on
/// each side wins.
pub fn scan_profile<T: Scalar>(raster: &ColdRaster, axis: &PrincipalAxis<T>) -> Vec<ScanRecord<T>> {
    let [cx, cy] = axis.centroid;
    let [dx, dy] = axis.direction;
    let left = [-dy, dx];
    let right = [dy, -dx];
    // Any axis point inside the raster is within one diagonal of the centroid.
    let reach = (2 * raster.side()) as i64;

    let mut records = Vec::new();
    for t in -reach..=reach {
        let tt = T::of_i64(t);
        let origin = [cx + tt * dx, cy + tt * dy];
        let (Some(ox), Some(oy)) = (origin[0].round().to_i64(), origin[1].round().to_i64()) else {
            continue;
        };
        if !raster.contains(ox, oy) {
            continue;
        }
        let (Some(l), Some(r)) = (first_hit(raster, origin, left), first_hit(raster, origin, right)) else {
            continue;
        };
        let (ld, rd) = (T::of_usize(l), T::of_usize(r));
        records.push(ScanRecord {
            t: tt,
            ld,
            rd,
            diff: (ld - rd).abs(),
        });
    }
    records
}

/// Fixed-length feature vector with every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector<T> {
    values: Vec<T>,
}

impl<T: Scalar> FeatureVector<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![T::zero(); len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == T::zero())
    }
}

/// Range of `t` over which the axis point lies inside the raster: the
/// reference line that the scan walks. `None` if the centroid is outside.
pub fn reference_span<T: Scalar>(raster: &ColdRaster, axis: &PrincipalAxis<T>) -> Option<(T, T)> {
    let reach = (2 * raster.side()) as i64;
    let inside = |t: i64| {
        let tt = T::of_i64(t);
        let x = (axis.centroid[0] + tt * axis.direction[0]).round().to_i64();
        let y = (axis.centroid[1] + tt * axis.direction[1]).round().to_i64();
        matches!((x, y), (Some(x), Some(y)) if raster.contains(x, y))
    };
    let lo = (-reach..=reach).find(|&t| inside(t))?;
    let hi = (-reach..=reach).rev().find(|&t| inside(t))?;
    Some((T::of_i64(lo), T::of_i64(hi)))
}

/// Bins records by `t` min-max normalised over the records themselves.
pub fn to_feature_vector<T: Scalar>(records: &[ScanRecord<T>], bins: usize, plane_radius: T) -> Result<FeatureVector<T>> {
    let span = records
        .iter()
        .fold(None, |acc: Option<(T, T)>, r| Some(acc.map_or((r.t, r.t), |(lo, hi)| (lo.min(r.t), hi.max(r.t)))));
    to_feature_vector_over(records, span.unwrap_or((T::zero(), T::zero())), bins, plane_radius)
}

/// Bins `|LD - RD|` by `t` min-max normalised over `span`; positions
/// outside the span fall into the end bins. Each bin holds its mean
/// difference divided by the plane radius, clamped to 1; empty bins are zero.
pub fn to_feature_vector_over<T: Scalar>(
    records: &[ScanRecord<T>],
    (lo, hi): (T, T),
    bins: usize,
    plane_radius: T,
) -> Result<FeatureVector<T>> {
    if bins == 0 {
        return Err(Error::Config("feature bins must be >= 1".into()));
    }
    if !(plane_radius > T::zero()) {
        return Err(Error::Config(format!("plane radius must be > 0, got {plane_radius}")));
    }
    if records.is_empty() {
        return Ok(FeatureVector::zeros(bins));
    }
    let span = hi - lo;
    let mut sums = vec![T::zero(); bins];
    let mut counts = vec![0usize; bins];
    for r in records {
        let u = if span > T::zero() {
            ((r.t - lo) / span).max(T::zero())
        } else {
            T::zero()
        };
        let k = (u * T::of_usize(bins)).floor().to_usize().unwrap_or(0).min(bins - 1);
        sums[k] = sums[k] + r.diff;
        counts[k] += 1;
    }
    let values = sums
        .into_iter()
        .zip(counts)
        .map(|(s, n)| {
            if n == 0 {
                T::zero()
            } else {
                (s / T::of_usize(n) / plane_radius).min(T::one())
            }
        })
        .collect();
    Ok(FeatureVector::new(values))
}
