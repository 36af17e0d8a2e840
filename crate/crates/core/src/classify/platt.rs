//! Platt scaling: `P(y = +1 | f) = 1 / (1 + exp(A f + B))`.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Platt<T> {
    pub a: T,
    pub b: T,
}

impl<T: Scalar> Platt<T> {
    pub fn posterior(&self, decision: T) -> T {
        sigmoid_predict(decision, self.a, self.b)
    }
}

/// Fits `(A, B)` by Newton's method with backtracking on the regularised
/// targets of Platt (1999), in the numerically safe form of Lin, Lin and
/// Weng (2007).
pub fn sigmoid_train<T: Scalar>(decisions: &[T], positive: &[bool]) -> Platt<T> {
    let prior1 = T::of_usize(positive.iter().filter(|&&p| p).count());
    let prior0 = T::of_usize(positive.len()) - prior1;
    let one = T::one();
    let two = T::of(2.0);

    let max_iter = 100;
    let min_step = T::of(1e-10);
    let sigma = T::of(1e-12);
    let eps = T::of(1e-5);

    let hi = (prior1 + one) / (prior1 + two);
    let lo = one / (prior0 + two);
    let targets: Vec<T> = positive.iter().map(|&p| if p { hi } else { lo }).collect();

    let loss = |a: T, b: T| -> T {
        decisions
            .iter()
            .zip(&targets)
            .map(|(&f, &t)| {
                let z = f * a + b;
                if z >= T::zero() {
                    t * z + (one + (-z).exp()).ln()
                } else {
                    (t - one) * z + (one + z.exp()).ln()
                }
            })
            .sum()
    };

    let mut a = T::zero();
    let mut b = ((prior0 + one) / (prior1 + one)).ln();
    let mut fval = loss(a, b);

    for _ in 0..max_iter {
        let (mut h11, mut h22, mut h21) = (sigma, sigma, T::zero());
        let (mut g1, mut g2) = (T::zero(), T::zero());
        for (&f, &t) in decisions.iter().zip(&targets) {
            let z = f * a + b;
            let (p, q) = if z >= T::zero() {
                let e = (-z).exp();
                (e / (one + e), one / (one + e))
            } else {
                let e = z.exp();
                (one / (one + e), e / (one + e))
            };
            let d2 = p * q;
            h11 = h11 + f * f * d2;
            h22 = h22 + d2;
            h21 = h21 + f * d2;
            let d1 = t - p;
            g1 = g1 + f * d1;
            g2 = g2 + d1;
        }
        if g1.abs() < eps && g2.abs() < eps {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;

        let mut step = one;
        while step >= min_step {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = loss(na, nb);
            if nf < fval + T::of(1e-4) * step * gd {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step = step / two;
        }
        if step < min_step {
            log::debug!("platt: line search failed");
            break;
        }
    }
    Platt { a, b }
}

pub fn sigmoid_predict<T: Scalar>(decision: T, a: T, b: T) -> T {
    let z = decision * a + b;
    if z >= T::zero() {
        (-z).exp() / (T::one() + (-z).exp())
    } else {
        T::one() / (T::one() + z.exp())
    }
}
