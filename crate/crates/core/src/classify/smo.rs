//! Sequential Minimal Optimization for the soft-margin SVM dual.
//!
//! Minimises `f(a) = a'Qa/2 - e'a` subject to `0 <= a_i <= C` and
//! `y'a = 0`, where `Q_ij = y_i y_j K(x_i, x_j)`. Each step picks the
//! maximal violating pair and solves the two-variable subproblem
//! analytically, following the LIBSVM update rules.

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::kernel::{gram_matrix, rbf};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams<T> {
    pub c: T,
    pub gamma: T,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> SvmParams<T> {
    pub fn new(c: T, gamma: T) -> Self {
        Self {
            c,
            gamma,
            tol: T::of(1e-3),
            max_iter: 1_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > T::zero()) || !self.c.is_finite() {
            return Err(Error::Config(format!("C must be > 0, got {}", self.c)));
        }
        if !(self.gamma > T::zero()) || !self.gamma.is_finite() {
            return Err(Error::Config(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::Config(format!("tolerance must be > 0, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Solver output on the full training set.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution<T> {
    pub alpha: Vec<T>,
    /// Decision offset: `f(x) = sum_i alpha_i y_i K(x_i, x) - rho`.
    pub rho: T,
    /// Dual objective `e'a - a'Qa/2` after every accepted step,
    /// starting with the initial value 0.
    pub objective_trace: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Scalar> DualSolution<T> {
    pub fn dual_objective(&self) -> T {
        *self.objective_trace.last().expect("trace starts with the initial value")
    }
}

/// Solves the dual for a precomputed kernel matrix `k` (row-major, n x n)
/// and labels `y` in `{-1, +1}`.
pub fn solve_dual<T: Scalar>(k: &[T], y: &[T], c: T, tol: T, max_iter: usize) -> DualSolution<T> {
    let n = y.len();
    debug_assert_eq!(k.len(), n * n);
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];
    let tau = T::of(TAU);

    let mut alpha = vec![T::zero(); n];
    let mut grad = vec![-T::one(); n];
    let mut trace = vec![T::zero()];
    let mut iterations = 0;
    let mut converged = false;

    let objective = |alpha: &[T], grad: &[T]| -> T {
        let f: T = alpha
            .iter()
            .zip(grad)
            .map(|(&a, &g)| a * (g - T::one()))
            .sum::<T>()
            / T::of(2.0);
        -f
    };

    while iterations < max_iter {
        let mut gmax = T::neg_infinity();
        let mut gmax2 = T::neg_infinity();
        let (mut sel_i, mut sel_j) = (usize::MAX, usize::MAX);
        for t in 0..n {
            let up = if y[t] > T::zero() { alpha[t] < c } else { alpha[t] > T::zero() };
            if up && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                sel_i = t;
            }
            let low = if y[t] > T::zero() { alpha[t] > T::zero() } else { alpha[t] < c };
            if low && y[t] * grad[t] > gmax2 {
                gmax2 = y[t] * grad[t];
                sel_j = t;
            }
        }
        if sel_i == usize::MAX || sel_j == usize::MAX || gmax + gmax2 < tol {
            converged = true;
            break;
        }
        let (i, j) = (sel_i, sel_j);
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = q(i, i) + q(j, j) + T::of(2.0) * q(i, j);
            if quad <= T::zero() {
                quad = tau;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] = alpha[i] + delta;
            alpha[j] = alpha[j] + delta;
            if diff > T::zero() {
                if alpha[j] < T::zero() {
                    alpha[j] = T::zero();
                    alpha[i] = diff;
                }
            } else if alpha[i] < T::zero() {
                alpha[i] = T::zero();
                alpha[j] = -diff;
            }
            if diff > T::zero() {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = q(i, i) + q(j, j) - T::of(2.0) * q(i, j);
            if quad <= T::zero() {
                quad = tau;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] = alpha[i] - delta;
            alpha[j] = alpha[j] + delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < T::zero() {
                alpha[j] = T::zero();
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < T::zero() {
                alpha[i] = T::zero();
                alpha[j] = sum;
            }
        }
        alpha[i] = alpha[i].max(T::zero()).min(c);
        alpha[j] = alpha[j].max(T::zero()).min(c);

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g = *g + q(t, i) * di + q(t, j) * dj;
        }

        let value = objective(&alpha, &grad);
        let prev = *trace.last().unwrap();
        if value < prev - T::of(1e-9) * (T::one() + prev.abs()) {
            debug!("smo: dual objective decreased from {prev} to {value} at step {iterations}");
        }
        trace.push(value);
    }
    if !converged {
        warn!("smo: stopped after {max_iter} iterations without reaching tolerance {tol}");
    }

    // Offset from free variables, or the midpoint of the feasible interval.
    let (mut ub, mut lb) = (T::infinity(), T::neg_infinity());
    let (mut free, mut sum_free) = (0usize, T::zero());
    for t in 0..n {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= T::zero();
        if at_upper {
            if y[t] < T::zero() {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if y[t] > T::zero() {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free = sum_free + yg;
        }
    }
    let rho = if free > 0 {
        sum_free / T::of_usize(free)
    } else {
        (ub + lb) / T::of(2.0)
    };

    DualSolution {
        alpha,
        rho,
        objective_trace: trace,
        iterations,
        converged,
    }
}

/// Binary Gaussian-kernel SVM keeping only its support vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm<T> {
    pub support_vectors: Vec<Vec<T>>,
    /// `alpha_i * y_i` for each support vector.
    pub coefficients: Vec<T>,
    pub bias: T,
    pub gamma: T,
    pub c: T,
}

impl<T: Scalar> BinarySvm<T> {
    pub fn dim(&self) -> Option<usize> {
        self.support_vectors.first().map(Vec::len)
    }

    /// Signed decision value; positive means the `+1` class.
    pub fn decision(&self, x: &[T]) -> Result<T> {
        if let Some(d) = self.dim() {
            if d != x.len() {
                return Err(Error::Shape {
                    expected: d,
                    got: x.len(),
                });
            }
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, &a)| a * rbf(sv, x, self.gamma))
            .sum::<T>()
            + self.bias)
    }
}

/// Trains a binary SVM; `positive[i]` is the class of `x[i]`.
pub fn train_binary<T: Scalar>(x: &[&[T]], positive: &[bool], params: &SvmParams<T>) -> Result<(BinarySvm<T>, DualSolution<T>)> {
    params.validate()?;
    if x.len() != positive.len() {
        return Err(Error::Shape {
            expected: x.len(),
            got: positive.len(),
        });
    }
    if !positive.iter().any(|&p| p) || positive.iter().all(|&p| p) {
        return Err(Error::DegenerateData("binary training needs both classes".into()));
    }
    let dim = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != dim) {
        return Err(Error::Shape {
            expected: dim,
            got: bad.len(),
        });
    }
    let y: Vec<T> = positive
        .iter()
        .map(|&p| if p { T::one() } else { -T::one() })
        .collect();
    let k = gram_matrix(x, params.gamma);
    let sol = solve_dual(&k, &y, params.c, params.tol, params.max_iter);

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for (i, &a) in sol.alpha.iter().enumerate() {
        if a > T::zero() {
            support_vectors.push(x[i].to_vec());
            coefficients.push(a * y[i]);
        }
    }
    let svm = BinarySvm {
        support_vectors,
        coefficients,
        bias: -sol.rho,
        gamma: params.gamma,
        c: params.c,
    };
    Ok((svm, sol))
}
