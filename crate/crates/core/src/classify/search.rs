//! Hyperparameter search over `(C, gamma)` scored by inner cross validation.

use serde::{Deserialize, Serialize};

use super::eval::{cross_validate, EvalMode};
use super::smo::SvmParams;
use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub c: f64,
    pub gamma: f64,
    pub cr: f64,
}

/// Proposes the next `(C, gamma)` given what has been scored so far.
/// A sequential model-based optimiser fits behind this seam.
pub trait SearchStrategy {
    fn propose(&mut self, history: &[Evaluation]) -> Option<(f64, f64)>;
}

/// Row-major log grid: `C` varies slowest.
#[derive(Debug, Clone)]
pub struct GridSearch {
    points: Vec<(f64, f64)>,
    next: usize,
}

fn log_space(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..steps)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (steps - 1) as f64))
        .collect()
}

impl GridSearch {
    pub fn log_grid(c_range: (f64, f64), gamma_range: (f64, f64), steps: usize) -> Self {
        let cs = log_space(c_range.0, c_range.1, steps);
        let gs = log_space(gamma_range.0, gamma_range.1, steps);
        let points = cs
            .iter()
            .flat_map(|&c| gs.iter().map(move |&g| (c, g)))
            .collect();
        Self { points, next: 0 }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

impl Default for GridSearch {
    /// `C` in `[1e-1, 1e3]`, gamma in `[1e-3, 1e1]`, five decades each.
    fn default() -> Self {
        Self::log_grid((1e-1, 1e3), (1e-3, 1e1), 5)
    }
}

impl SearchStrategy for GridSearch {
    fn propose(&mut self, _history: &[Evaluation]) -> Option<(f64, f64)> {
        let p = self.points.get(self.next).copied();
        self.next += 1;
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: Evaluation,
    pub history: Vec<Evaluation>,
}

/// Scores up to `budget` proposals and returns the first best one.
pub fn hyperparameter_search<T: Scalar>(
    data: &LabeledDataset<T>,
    budget: usize,
    inner: EvalMode,
    seed: u64,
    strategy: &mut dyn SearchStrategy,
) -> Result<SearchResult> {
    if budget == 0 {
        return Err(Error::Config("search budget must be >= 1".into()));
    }
    let mut history: Vec<Evaluation> = Vec::with_capacity(budget);
    while history.len() < budget {
        let Some((c, gamma)) = strategy.propose(&history) else {
            break;
        };
        let params = SvmParams::new(T::of(c), T::of(gamma));
        let cr = cross_validate(data, inner, &params, seed)?.classification_rate()?;
        log::info!("search: C={c:e} gamma={gamma:e} CR={cr:.2}");
        history.push(Evaluation { c, gamma, cr });
    }
    let best = history
        .iter()
        .copied()
        .reduce(|best, e| if e.cr > best.cr { e } else { best })
        .ok_or_else(|| Error::Config("search strategy proposed nothing".into()))?;
    Ok(SearchResult { best, history })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_layout() {
        let g = GridSearch::default();
        assert_eq!(g.points().len(), 25);
        let (c, gamma) = g.points()[0];
        assert!((c - 0.1).abs() < 1e-12 && (gamma - 1e-3).abs() < 1e-15);
        let (c, gamma) = g.points()[24];
        assert!((c - 1e3).abs() < 1e-9 && (gamma - 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_budget_rejected() {
        let data = LabeledDataset::new(vec![(vec![0.0f64], "a".into()), (vec![1.0], "b".into())]).unwrap();
        assert!(matches!(
            hyperparameter_search(&data, 0, EvalMode::KFold(2), 0, &mut GridSearch::default()),
            Err(Error::Config(_))
        ));
    }
}
