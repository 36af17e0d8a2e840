use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ovo::train_multiclass;
use super::smo::SvmParams;
use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Counts indexed `[true class][predicted class]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: Vec<String>,
    counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let k = classes.len();
        Self {
            classes,
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn from_counts(classes: Vec<String>, counts: Vec<Vec<usize>>) -> Result<Self> {
        let k = classes.len();
        if counts.len() != k || counts.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidInput(format!("confusion counts must be {k}x{k}")));
        }
        Ok(Self { classes, counts })
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (row, orow) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(orow) {
                *c += o;
            }
        }
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    /// Row-normalised percentages; rows without samples are all zero.
    pub fn percentages(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let n: usize = row.iter().sum();
                row.iter()
                    .map(|&c| if n == 0 { 0.0 } else { 100.0 * c as f64 / n as f64 })
                    .collect()
            })
            .collect()
    }

    /// Classification rate, `100 * trace / total`.
    pub fn classification_rate(&self) -> Result<f64> {
        let total = self.total();
        if total == 0 {
            return Err(Error::InvalidInput("confusion matrix is empty".into()));
        }
        Ok(100.0 * self.trace() as f64 / total as f64)
    }

    /// Tab-separated table: one row per true class with row percentages,
    /// then the overall rate.
    pub fn render_table(&self) -> String {
        let mut s = String::from("Classes");
        for c in &self.classes {
            let _ = write!(s, "\t{c}");
        }
        s.push('\n');
        for (c, row) in self.classes.iter().zip(self.percentages()) {
            s.push_str(c);
            for v in row {
                let _ = write!(s, "\t{v:.1}%");
            }
            s.push('\n');
        }
        match self.classification_rate() {
            Ok(cr) => {
                let _ = writeln!(s, "CR in (%)\t{cr:.2}");
            }
            Err(_) => s.push_str("CR in (%)\tn/a\n"),
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EvalMode {
    /// Stratified k-fold cross validation.
    KFold(usize),
    /// Single stratified random split; 450/50 on a 500-sample set is a
    /// test fraction of 0.1.
    Holdout { test_fraction: f64 },
}

impl Default for EvalMode {
    fn default() -> Self {
        EvalMode::KFold(10)
    }
}

fn shuffled_by_class<T: Scalar>(data: &LabeledDataset<T>, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class = vec![Vec::new(); data.classes().len()];
    for (i, s) in data.samples().iter().enumerate() {
        by_class[s.class].push(i);
    }
    for members in &mut by_class {
        members.shuffle(&mut rng);
    }
    by_class
}

/// Train/test index splits for `mode`, stratified by class.
pub(crate) fn splits<T: Scalar>(data: &LabeledDataset<T>, mode: EvalMode, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let by_class = shuffled_by_class(data, seed);
    match mode {
        EvalMode::KFold(k) => {
            if k < 2 {
                return Err(Error::Config(format!("need at least 2 folds, got {k}")));
            }
            for (class, members) in data.classes().iter().zip(&by_class) {
                if members.len() < k {
                    return Err(Error::Stratification {
                        class: class.clone(),
                        count: members.len(),
                        folds: k,
                    });
                }
            }
            let mut fold_of = vec![0usize; data.len()];
            for members in &by_class {
                for (pos, &i) in members.iter().enumerate() {
                    fold_of[i] = pos % k;
                }
            }
            Ok((0..k)
                .map(|f| {
                    let (test, train): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| fold_of[i] == f);
                    (train, test)
                })
                .collect())
        }
        EvalMode::Holdout { test_fraction } => {
            if !(test_fraction > 0.0 && test_fraction < 1.0) {
                return Err(Error::Config(format!(
                    "holdout test fraction must lie in (0, 1), got {test_fraction}"
                )));
            }
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (class, members) in data.classes().iter().zip(&by_class) {
                if members.len() < 3 {
                    return Err(Error::Stratification {
                        class: class.clone(),
                        count: members.len(),
                        folds: 2,
                    });
                }
                let n_test = ((members.len() as f64 * test_fraction).round() as usize).clamp(1, members.len() - 2);
                test.extend_from_slice(&members[..n_test]);
                train.extend_from_slice(&members[n_test..]);
            }
            train.sort_unstable();
            test.sort_unstable();
            Ok(vec![(train, test)])
        }
    }
}

/// Aggregated confusion matrix over all held-out predictions.
pub fn cross_validate<T: Scalar>(data: &LabeledDataset<T>, mode: EvalMode, params: &SvmParams<T>, seed: u64) -> Result<ConfusionMatrix> {
    let folds = splits(data, mode, seed)?;
    let partials = folds
        .par_iter()
        .map(|(train, test)| {
            let model = train_multiclass(&data.subset(train), params)?;
            let mut cm = ConfusionMatrix::new(data.classes().to_vec());
            for &i in test {
                let s = &data.samples()[i];
                cm.record(s.class, model.predict(&s.features)?.class);
            }
            Ok(cm)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = ConfusionMatrix::new(data.classes().to_vec());
    for cm in &partials {
        total.add(cm);
    }
    Ok(total)
}
