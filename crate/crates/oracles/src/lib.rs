//! Slow, independent reference implementations. Nothing here shares code
//! with `cold-core`; tests compare the two.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};

/// Recursive Ramer-Douglas-Peucker on integer points with exact rational
/// arithmetic. `eps = eps_num / eps_den`. Distances are to the closed
/// segment between the two anchors; the first farthest point wins ties.
pub fn naive_rdp(points: &[(i64, i64)], eps_num: i64, eps_den: i64) -> Vec<(i64, i64)> {
    fn dist_sq(p: (i64, i64), a: (i64, i64), b: (i64, i64)) -> (i128, i128) {
        let (vx, vy) = ((b.0 - a.0) as i128, (b.1 - a.1) as i128);
        let (px, py) = ((p.0 - a.0) as i128, (p.1 - a.1) as i128);
        let len = vx * vx + vy * vy;
        let dot = px * vx + py * vy;
        if len == 0 || dot <= 0 {
            (px * px + py * py, 1)
        } else if dot >= len {
            let (qx, qy) = ((p.0 - b.0) as i128, (p.1 - b.1) as i128);
            (qx * qx + qy * qy, 1)
        } else {
            let cross = px * vy - py * vx;
            (cross * cross, len)
        }
    }
    fn greater(a: (i128, i128), b: (i128, i128)) -> bool {
        a.0 * b.1 > b.0 * a.1
    }
    fn rec(pts: &[(i64, i64)], eps: (i128, i128), out: &mut Vec<(i64, i64)>) {
        // Emits every kept point except the last.
        let n = pts.len();
        if n <= 2 {
            out.push(pts[0]);
            return;
        }
        let mut best = 0;
        let mut best_d = (-1i128, 1i128);
        for i in 1..n - 1 {
            let d = dist_sq(pts[i], pts[0], pts[n - 1]);
            if greater(d, best_d) {
                best = i;
                best_d = d;
            }
        }
        if greater(best_d, eps) {
            rec(&pts[..=best], eps, out);
            rec(&pts[best..], eps, out);
        } else {
            out.push(pts[0]);
        }
    }
    if points.len() < 2 {
        return points.to_vec();
    }
    let eps = ((eps_num as i128).pow(2), (eps_den as i128).pow(2));
    let mut out = Vec::new();
    rec(points, eps, &mut out);
    out.push(*points.last().unwrap());
    out
}

/// Maximum of the SVM dual `sum(a) - a'Qa/2` over `0 <= a <= c`,
/// `y'a = 0`, with `Q_ij = y_i y_j K_ij`. Enumerates which bound each
/// variable sits at (lower, upper or free) and solves the stationarity
/// system on the free set; exponential in `n`, meant for `n <= 8`.
pub fn brute_force_dual(k: &[f64], y: &[f64], c: f64) -> (f64, Vec<f64>) {
    let n = y.len();
    assert_eq!(k.len(), n * n);
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];
    let objective = |a: &[f64]| {
        let mut v: f64 = a.iter().sum();
        for i in 0..n {
            for j in 0..n {
                v -= 0.5 * a[i] * a[j] * q(i, j);
            }
        }
        v
    };
    let tol = 1e-9 * c.max(1.0);
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    let mut state = vec![0u8; n];
    loop {
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut a: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        let feasible = if free.is_empty() {
            (0..n).map(|i| y[i] * a[i]).sum::<f64>().abs() <= tol
        } else {
            // [Q_FF  y_F] [a_F]   [1 - Q_FU a_U]
            // [y_F'   0 ] [nu ] = [ -y_U' a_U   ]
            let m = free.len();
            let mut lhs = DMatrix::<f64>::zeros(m + 1, m + 1);
            let mut rhs = DVector::<f64>::zeros(m + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    lhs[(r, s)] = q(i, j);
                }
                lhs[(r, m)] = y[i];
                lhs[(m, r)] = y[i];
                rhs[r] = 1.0 - (0..n).filter(|j| state[*j] != 2).map(|j| q(i, j) * a[j]).sum::<f64>();
            }
            rhs[m] = -(0..n).filter(|j| state[*j] != 2).map(|j| y[j] * a[j]).sum::<f64>();
            let svd = lhs.clone().svd(true, true);
            match svd.solve(&rhs, 1e-12) {
                Ok(sol) if (&lhs * &sol - &rhs).norm() <= 1e-7 * (1.0 + rhs.norm()) => {
                    for (r, &i) in free.iter().enumerate() {
                        a[i] = sol[r];
                    }
                    free.iter().all(|&i| a[i] >= -tol && a[i] <= c + tol)
                }
                _ => false,
            }
        };
        if feasible {
            for v in &mut a {
                *v = v.clamp(0.0, c);
            }
            let obj = objective(&a);
            if obj > best.0 {
                best = (obj, a);
            }
        }
        let mut i = 0;
        while i < n && state[i] == 2 {
            state[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
        state[i] += 1;
    }
    best
}

/// Centroid and major-axis unit vector of a point cloud from an
/// eigendecomposition of its covariance matrix.
pub fn pca_axis(points: &[(f64, f64)]) -> ([f64; 2], [f64; 2]) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut cov = Matrix2::<f64>::zeros();
    for &(x, y) in points {
        let (dx, dy) = (x - mx, y - my);
        cov[(0, 0)] += dx * dx / n;
        cov[(0, 1)] += dx * dy / n;
        cov[(1, 0)] += dx * dy / n;
        cov[(1, 1)] += dy * dy / n;
    }
    let eig = SymmetricEigen::new(cov);
    let k = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
    let v = eig.eigenvectors.column(k);
    ([mx, my], [v[0], v[1]])
}

/// Angle in degrees between two undirected axes.
pub fn axis_angle_deg(a: [f64; 2], b: [f64; 2]) -> f64 {
    let cos = (a[0] * b[0] + a[1] * b[1]).abs() / (a[0].hypot(a[1]) * b[0].hypot(b[1]));
    cos.min(1.0).acos().to_degrees()
}

/// Segment angle in degrees by hand: `atan(dy/dx)`, vertical is 90.
pub fn hand_polar(dx: f64, dy: f64) -> (f64, f64) {
    let theta = if dx == 0.0 { 90.0 } else { (dy / dx).atan() * 180.0 / std::f64::consts::PI };
    (theta, (dx * dx + dy * dy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rdp_on_a_corner() {
        let pts: Vec<(i64, i64)> = (0..=10).map(|i| (i, 0)).chain((1..=10).map(|i| (10, i))).collect();
        assert_eq!(naive_rdp(&pts, 2, 1), vec![(0, 0), (10, 0), (10, 10)]);
        assert_eq!(naive_rdp(&pts[..5], 2, 1), vec![(0, 0), (4, 0)]);
    }

    #[test]
    fn dual_of_two_points() {
        // Two points, opposite labels, K = [[1, e],[e, 1]]: a1 = a2 = 1/(1 - e).
        let e = 0.25;
        let (obj, a) = brute_force_dual(&[1.0, e, e, 1.0], &[1.0, -1.0], 100.0);
        let want = 1.0 / (1.0 - e);
        assert!((a[0] - want).abs() < 1e-9 && (a[1] - want).abs() < 1e-9);
        assert!((obj - want).abs() < 1e-9);
        // Box active: a = C.
        let (_, a) = brute_force_dual(&[1.0, e, e, 1.0], &[1.0, -1.0], 0.5);
        assert!((a[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pca_of_a_diagonal() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, i as f64 + if i % 2 == 0 { 0.1 } else { -0.1 })).collect();
        let (_, d) = pca_axis(&pts);
        assert!(axis_angle_deg(d, [1.0, 1.0]) < 1.0);
    }
}
