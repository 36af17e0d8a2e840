//! One-vs-one Gaussian-kernel SVM classification and its evaluation.

mod eval;
mod kernel;
mod ovo;
mod platt;
mod search;
mod smo;

pub use eval::{cross_validate, ConfusionMatrix, EvalMode};
pub use kernel::{gaussian_kernel, gram_matrix};
pub use ovo::{train_multiclass, PairModel, Prediction, TrainedModel, MODEL_FORMAT_VERSION};
pub use platt::{sigmoid_predict, sigmoid_train, Platt};
pub use search::{hyperparameter_search, Evaluation, GridSearch, SearchResult, SearchStrategy};
pub use smo::{solve_dual, train_binary, BinarySvm, DualSolution, SvmParams};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample<T> {
    pub features: Vec<T>,
    /// Index into the dataset's class list.
    pub class: usize,
}

/// Feature vectors with class labels. Classes are kept sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset<T> {
    classes: Vec<String>,
    samples: Vec<Sample<T>>,
    dim: usize,
}

impl<T: Scalar> LabeledDataset<T> {
    pub fn new(rows: Vec<(Vec<T>, String)>) -> Result<Self> {
        let classes: Vec<String> = rows
            .iter()
            .map(|(_, l)| l.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let samples = rows
            .into_iter()
            .map(|(features, label)| Sample {
                features,
                class: classes.binary_search(&label).expect("label collected above"),
            })
            .collect();
        Self::from_parts(classes, samples)
    }

    pub fn from_parts(classes: Vec<String>, samples: Vec<Sample<T>>) -> Result<Self> {
        if classes.iter().any(|c| c.is_empty()) {
            return Err(Error::InvalidInput("class labels must be non-empty".into()));
        }
        let dim = samples.first().map_or(0, |s| s.features.len());
        for s in &samples {
            if s.features.len() != dim {
                return Err(Error::Shape {
                    expected: dim,
                    got: s.features.len(),
                });
            }
            if s.class >= classes.len() {
                return Err(Error::InvalidInput(format!("class index {} out of range", s.class)));
            }
        }
        Ok(Self {
            classes,
            samples,
            dim,
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn samples(&self) -> &[Sample<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for s in &self.samples {
            counts[s.class] += 1;
        }
        counts
    }

    /// Samples at `indices`, keeping the full class list.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            classes: self.classes.clone(),
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            dim: self.dim,
        }
    }

    pub fn with_classes_of(&self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.samples.len() {
            return Err(Error::Shape {
                expected: self.samples.len(),
                got: labels.len(),
            });
        }
        let samples = self
            .samples
            .iter()
            .zip(labels)
            .map(|(s, class)| Sample {
                features: s.features.clone(),
                class,
            })
            .collect();
        Self::from_parts(self.classes.clone(), samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_sorts_classes_and_checks_shape() {
        let d = LabeledDataset::new(vec![
            (vec![1.0, 2.0], "b".to_string()),
            (vec![0.0, 2.0], "a".to_string()),
            (vec![0.0, 1.0], "b".to_string()),
        ])
        .unwrap();
        assert_eq!(d.classes(), &["a".to_string(), "b".to_string()]);
        assert_eq!(d.class_counts(), vec![1, 2]);
        assert_eq!(d.dim(), 2);
        let bad = LabeledDataset::new(vec![(vec![1.0], "a".into()), (vec![1.0, 2.0], "b".into())]);
        assert!(matches!(bad, Err(Error::Shape { .. })));
        let empty_label = LabeledDataset::new(vec![(vec![1.0f64], String::new())]);
        assert!(empty_label.is_err());
    }
}
