//! Edge maps, contour tracing and dominant points.
//!
//! Edges come from a classic Canny detector. Each 8-connected edge
//! component is walked into one or more pixel chains, and every chain is
//! reduced to its dominant points with Ramer-Douglas-Peucker. Consecutive
//! dominant points form the segment pairs that feed the polar transform.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{GrayImage, Pixel};
use crate::scalar::Scalar;

/// Components with fewer edge pixels than this are treated as noise.
pub const MIN_COMPONENT: usize = 8;

/// Binary edge raster with the dimensions of its source image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Edge test that treats out-of-range coordinates as non-edge.
    #[inline]
    pub fn is_edge(&self, x: i32, y: i32) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.bits[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, on: bool) {
        self.bits[y * self.width + x] = on;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn pixels(&self) -> impl Iterator<Item = Pixel> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b)
            .map(move |(i, _)| Pixel::new((i % self.width) as i32, (i / self.width) as i32))
    }

    /// Debug rendering: edges white on black.
    pub fn to_gray(&self) -> GrayImage {
        let data = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        GrayImage::new(self.width, self.height, data).expect("same dimensions")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CannyParams {
    pub sigma: f64,
    pub low: f64,
    pub high: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            sigma: 1.4,
            low: 50.0,
            high: 150.0,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.low >= 0.0 && self.low < self.high) {
            return Err(Error::Config(format!(
                "canny thresholds need 0 <= low < high, got low={} high={}",
                self.low, self.high
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("canny sigma must be >= 0, got {}", self.sigma)));
        }
        Ok(())
    }
}

fn gaussian_taps(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as i32;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-(f64::from(i * i)) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

fn blur(img: &GrayImage, sigma: f64) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let taps = gaussian_taps(sigma);
    let r = taps.len() / 2;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;

    let src: Vec<f64> = img.data().iter().map(|&v| f64::from(v)).collect();
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let acc = if x >= r && x + r < w {
                taps.iter().zip(&row[x - r..=x + r]).map(|(t, v)| t * v).sum()
            } else {
                taps.iter()
                    .enumerate()
                    .map(|(k, t)| t * row[clamp(x as isize + k as isize - r as isize, w)])
                    .sum()
            };
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let o = &mut out[y * w..(y + 1) * w];
        for (k, t) in taps.iter().enumerate() {
            let yy = clamp(y as isize + k as isize - r as isize, h);
            for (acc, v) in o.iter_mut().zip(&tmp[yy * w..(yy + 1) * w]) {
                *acc += t * v;
            }
        }
    }
    out
}

/// Canny edge detector: Gaussian smoothing, Sobel gradient, non-maximum
/// suppression and double-threshold hysteresis (8-connected).
///
/// Thresholds apply to the unnormalised Sobel magnitude of 8-bit input.
pub fn canny_edges(img: &GrayImage, params: &CannyParams) -> Result<EdgeMap> {
    params.validate()?;
    let (w, h) = (img.width(), img.height());
    let mut edges = EdgeMap::new(w, h);
    if w == 0 || h == 0 {
        return Ok(edges);
    }

    let smooth = blur(img, params.sigma);
    let at = |x: isize, y: isize| -> f64 {
        let xx = x.clamp(0, w as isize - 1) as usize;
        let yy = y.clamp(0, h as isize - 1) as usize;
        smooth[yy * w + xx]
    };

    let mut mag = vec![0.0; w * h];
    let mut dir = vec![0u8; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let n = if x > 0 && y > 0 && x + 1 < w as isize && y + 1 < h as isize {
                let c = y as usize * w + x as usize;
                [
                    smooth[c - w - 1],
                    smooth[c - w],
                    smooth[c - w + 1],
                    smooth[c - 1],
                    smooth[c + 1],
                    smooth[c + w - 1],
                    smooth[c + w],
                    smooth[c + w + 1],
                ]
            } else {
                [
                    at(x - 1, y - 1),
                    at(x, y - 1),
                    at(x + 1, y - 1),
                    at(x - 1, y),
                    at(x + 1, y),
                    at(x - 1, y + 1),
                    at(x, y + 1),
                    at(x + 1, y + 1),
                ]
            };
            let gx = (n[2] + 2.0 * n[4] + n[7]) - (n[0] + 2.0 * n[3] + n[5]);
            let gy = (n[5] + 2.0 * n[6] + n[7]) - (n[0] + 2.0 * n[1] + n[2]);
            if gx == 0.0 && gy == 0.0 {
                continue;
            }
            let i = y as usize * w + x as usize;
            mag[i] = gx.hypot(gy);
            // Quantise the gradient direction into 0, 45, 90, 135 degrees.
            let mut deg = gy.atan2(gx).to_degrees();
            if deg < 0.0 {
                deg += 180.0;
            }
            dir[i] = if !(22.5..157.5).contains(&deg) {
                0
            } else if deg < 67.5 {
                1
            } else if deg < 112.5 {
                2
            } else {
                3
            };
        }
    }

    let mag_at = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    const STEP: [(isize, isize); 4] = [(1, 0), (1, 1), (0, 1), (-1, 1)];
    let mut thin = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            let m = mag[i];
            if m <= 0.0 {
                continue;
            }
            let (dx, dy) = STEP[dir[i] as usize];
            // Asymmetric comparison keeps exactly one of two equal maxima.
            if m > mag_at(x - dx, y - dy) && m >= mag_at(x + dx, y + dy) {
                thin[i] = m;
            }
        }
    }

    let mut queue = VecDeque::new();
    for (i, &m) in thin.iter().enumerate() {
        if m >= params.high {
            edges.bits[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for (dx, dy) in NEIGHBOURS {
            let (nx, ny) = (x + dx as isize, y + dy as isize);
            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                continue;
            }
            let j = ny as usize * w + nx as usize;
            if !edges.bits[j] && thin[j] >= params.low {
                edges.bits[j] = true;
                queue.push_back(j);
            }
        }
    }
    Ok(edges)
}

/// Moore neighbourhood in clockwise order starting east (y grows downwards).
pub const NEIGHBOURS: [(i32, i32); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

/// Chain-walking order: the edge-adjacent Moore neighbours first, then the
/// corner-adjacent ones, each group clockwise from east.
const WALK_ORDER: [(i32, i32); 8] = [
    (1, 0),
    (0, 1),
    (-1, 0),
    (0, -1),
    (1, 1),
    (-1, 1),
    (-1, -1),
    (1, -1),
];

/// Ordered chain of 8-connected edge pixels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contour {
    pub points: Vec<Pixel>,
    pub closed: bool,
}

impl Contour {
    /// Builds a contour and derives the closed flag from its endpoints.
    pub fn new(points: Vec<Pixel>) -> Self {
        let closed = points.len() >= 3 && points[0].touches(*points.last().unwrap());
        Self { points, closed }
    }

    pub fn open(points: Vec<Pixel>) -> Self {
        Self {
            points,
            closed: false,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Traces every edge component with at least [`MIN_COMPONENT`] pixels.
pub fn trace_contours(edges: &EdgeMap) -> Vec<Contour> {
    trace_contours_with_min(edges, MIN_COMPONENT)
}

/// Splits each 8-connected edge component into pixel chains so that every
/// kept edge pixel lands in exactly one contour. Chains start at a pixel
/// with at most one unvisited neighbour when one exists, which makes open
/// strokes come out as a single chain.
pub fn trace_contours_with_min(edges: &EdgeMap, min_component: usize) -> Vec<Contour> {
    let (w, h) = (edges.width, edges.height);
    let mut seen = vec![false; w * h];
    let mut visited = vec![false; w * h];
    let mut contours = Vec::new();
    let idx = |p: Pixel| p.y as usize * w + p.x as usize;

    for start in edges.pixels() {
        if seen[idx(start)] {
            continue;
        }
        // Collect the component in BFS order, then sort to raster order.
        let mut component = vec![start];
        seen[idx(start)] = true;
        let mut head = 0;
        while head < component.len() {
            let p = component[head];
            head += 1;
            for (dx, dy) in NEIGHBOURS {
                let q = Pixel::new(p.x + dx, p.y + dy);
                if edges.is_edge(q.x, q.y) && !seen[idx(q)] {
                    seen[idx(q)] = true;
                    component.push(q);
                }
            }
        }
        if component.len() < min_component {
            continue;
        }
        component.sort_by_key(|p| (p.y, p.x));

        let unvisited_degree = |p: Pixel, visited: &[bool]| {
            NEIGHBOURS
                .iter()
                .filter(|(dx, dy)| {
                    let q = Pixel::new(p.x + dx, p.y + dy);
                    edges.is_edge(q.x, q.y) && !visited[idx(q)]
                })
                .count()
        };

        let mut remaining = component.len();
        while remaining > 0 {
            let first = component
                .iter()
                .copied()
                .filter(|&p| !visited[idx(p)])
                .find(|&p| unvisited_degree(p, &visited) <= 1)
                .or_else(|| component.iter().copied().find(|&p| !visited[idx(p)]))
                .expect("remaining > 0");

            let mut chain = vec![first];
            visited[idx(first)] = true;
            let mut cur = first;
            loop {
                let next = WALK_ORDER.iter().find_map(|(dx, dy)| {
                    let q = Pixel::new(cur.x + dx, cur.y + dy);
                    (edges.is_edge(q.x, q.y) && !visited[idx(q)]).then_some(q)
                });
                match next {
                    Some(q) => {
                        visited[idx(q)] = true;
                        chain.push(q);
                        cur = q;
                    }
                    None => break,
                }
            }
            remaining -= chain.len();
            contours.push(Contour::new(chain));
        }
    }
    contours
}

/// Dominant points retained by polygonal approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominantPointSet<T> {
    pub points: Vec<Pixel>,
    pub epsilon: T,
    pub closed: bool,
}

/// Squared distance from `p` to the segment `a`-`b`.
pub fn segment_distance_sq<T: Scalar>(p: Pixel, a: Pixel, b: Pixel) -> T {
    let (vx, vy) = (i128::from(b.x - a.x), i128::from(b.y - a.y));
    let (px, py) = (i128::from(p.x - a.x), i128::from(p.y - a.y));
    let len_sq = vx * vx + vy * vy;
    let along = px * vx + py * vy;
    let to = |v: i128| T::from_i128(v).expect("i128 converts to Scalar");
    if len_sq == 0 || along <= 0 {
        return to(px * px + py * py);
    }
    if along >= len_sq {
        let (qx, qy) = (i128::from(p.x - b.x), i128::from(p.y - b.y));
        return to(qx * qx + qy * qy);
    }
    let cross = px * vy - py * vx;
    to(cross * cross) / to(len_sq)
}

/// Ramer-Douglas-Peucker over an open point list; returns kept indices in
/// ascending order, always including both endpoints.
pub fn rdp_indices<T: Scalar>(points: &[Pixel], epsilon: T) -> Vec<usize> {
    let n = points.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let eps_sq = epsilon * epsilon;
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    let mut stack = vec![(0usize, n - 1)];
    while let Some((lo, hi)) = stack.pop() {
        if hi <= lo + 1 {
            continue;
        }
        let mut best = (lo, T::neg_infinity());
        for (k, &p) in points.iter().enumerate().take(hi).skip(lo + 1) {
            let d = segment_distance_sq::<T>(p, points[lo], points[hi]);
            if d > best.1 {
                best = (k, d);
            }
        }
        if best.1 > eps_sq {
            keep[best.0] = true;
            stack.push((best.0, hi));
            stack.push((lo, best.0));
        }
    }
    (0..n).filter(|&i| keep[i]).collect()
}

/// Polygonal approximation of a contour. Closed contours are split at the
/// point farthest from the first point and each half is simplified.
pub fn dominant_points<T: Scalar>(contour: &Contour, epsilon: T) -> Result<DominantPointSet<T>> {
    if !(epsilon > T::zero()) {
        return Err(Error::Config(format!("epsilon must be > 0, got {epsilon}")));
    }
    let pts = &contour.points;
    if pts.len() < 2 {
        return Err(Error::InvalidContour(format!(
            "need at least 2 points, got {}",
            pts.len()
        )));
    }
    if pts.iter().all(|&p| p == pts[0]) {
        return Err(Error::InvalidContour("all points coincide".into()));
    }

    let points = if contour.closed {
        let origin = pts[0];
        let far = pts
            .iter()
            .enumerate()
            .fold((0usize, -1i64), |best, (k, p)| {
                let (dx, dy) = (i64::from(p.x - origin.x), i64::from(p.y - origin.y));
                let d = dx * dx + dy * dy;
                if d > best.1 {
                    (k, d)
                } else {
                    best
                }
            })
            .0;
        let first_half = &pts[..=far];
        let mut second_half: Vec<Pixel> = pts[far..].to_vec();
        second_half.push(origin);

        let mut out: Vec<Pixel> = rdp_indices(first_half, epsilon)
            .into_iter()
            .map(|i| first_half[i])
            .collect();
        let tail = rdp_indices(&second_half, epsilon);
        // Skip the split point (already present) and the repeated origin.
        out.extend(
            tail[1..tail.len() - 1]
                .iter()
                .map(|&i| second_half[i]),
        );
        out
    } else {
        rdp_indices(pts, epsilon)
            .into_iter()
            .map(|i| pts[i])
            .collect()
    };

    Ok(DominantPointSet {
        points,
        epsilon,
        closed: contour.closed,
    })
}

/// Two dominant points joined into one line segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentPair {
    pub a: Pixel,
    pub b: Pixel,
}

/// Pairs contour-adjacent dominant points, closing the loop for closed
/// contours. Zero-length pairs are dropped.
pub fn segment_pairs<T>(d: &DominantPointSet<T>) -> Vec<SegmentPair> {
    let pts = &d.points;
    let mut pairs: Vec<SegmentPair> = pts
        .windows(2)
        .map(|w| SegmentPair { a: w[0], b: w[1] })
        .collect();
    if d.closed && pts.len() > 2 {
        pairs.push(SegmentPair {
            a: pts[pts.len() - 1],
            b: pts[0],
        });
    }
    pairs.retain(|p| p.a != p.b);
    pairs
}
