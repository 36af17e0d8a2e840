//! One-vs-one ensemble, voting and model persistence.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::platt::{sigmoid_train, Platt};
use super::smo::{train_binary, BinarySvm, SvmParams};
use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::io::{read_to_string, write_atomic};
use crate::pipeline::FeatureConfig;
use crate::scalar::Scalar;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Classifier for one unordered class pair; `positive` wins on a positive
/// decision value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairModel<T> {
    pub positive: usize,
    pub negative: usize,
    pub svm: BinarySvm<T>,
    pub platt: Platt<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel<T> {
    pub format_version: u32,
    pub classes: Vec<String>,
    pub dim: usize,
    pub c: T,
    pub gamma: T,
    pub pairs: Vec<PairModel<T>>,
    pub feature_config: FeatureConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<T> {
    pub class: usize,
    pub label: String,
    pub votes: Vec<usize>,
    /// Per-class posterior: summed pairwise Platt posteriors, normalised to
    /// sum to one.
    pub scores: Vec<T>,
}

/// Trains one SVM per class pair plus its Platt sigmoid on the pair's own
/// training decision values.
pub fn train_multiclass<T: Scalar>(data: &LabeledDataset<T>, params: &SvmParams<T>) -> Result<TrainedModel<T>> {
    params.validate()?;
    let k = data.classes().len();
    if k < 2 {
        return Err(Error::DegenerateData(format!("need at least 2 classes, got {k}")));
    }
    for (class, &count) in data.classes().iter().zip(&data.class_counts()) {
        if count < 2 {
            return Err(Error::InsufficientData {
                class: class.clone(),
                count,
                needed: 2,
            });
        }
    }

    let pair_list: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let pairs = pair_list
        .par_iter()
        .map(|&(pos, neg)| {
            let members: Vec<_> = data
                .samples()
                .iter()
                .filter(|s| s.class == pos || s.class == neg)
                .collect();
            let x: Vec<&[T]> = members.iter().map(|s| s.features.as_slice()).collect();
            let labels: Vec<bool> = members.iter().map(|s| s.class == pos).collect();
            let (svm, _) = train_binary(&x, &labels, params)?;
            let decisions = x.iter().map(|r| svm.decision(r)).collect::<Result<Vec<_>>>()?;
            let platt = sigmoid_train(&decisions, &labels);
            Ok(PairModel {
                positive: pos,
                negative: neg,
                svm,
                platt,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        classes: data.classes().to_vec(),
        dim: data.dim(),
        c: params.c,
        gamma: params.gamma,
        pairs,
        feature_config: FeatureConfig::default(),
    })
}

impl<T: Scalar> TrainedModel<T> {
    pub fn with_feature_config(mut self, config: FeatureConfig) -> Self {
        self.feature_config = config;
        self
    }

    /// Majority vote over pair models; a zero decision value abstains.
    /// Ties go to the highest summed posterior, then to the first class.
    pub fn predict(&self, x: &[T]) -> Result<Prediction<T>> {
        if x.len() != self.dim {
            return Err(Error::Shape {
                expected: self.dim,
                got: x.len(),
            });
        }
        let k = self.classes.len();
        let mut votes = vec![0usize; k];
        let mut summed = vec![T::zero(); k];
        for pm in &self.pairs {
            let f = pm.svm.decision(x)?;
            if f > T::zero() {
                votes[pm.positive] += 1;
            } else if f < T::zero() {
                votes[pm.negative] += 1;
            }
            let p = pm.platt.posterior(f);
            summed[pm.positive] = summed[pm.positive] + p;
            summed[pm.negative] = summed[pm.negative] + (T::one() - p);
        }
        let mut best = 0;
        for c in 1..k {
            if votes[c] > votes[best] || (votes[c] == votes[best] && summed[c] > summed[best]) {
                best = c;
            }
        }
        let norm = T::of_usize(self.pairs.len().max(1));
        let scores = summed.into_iter().map(|s| s / norm).collect();
        Ok(Prediction {
            class: best,
            label: self.classes[best].clone(),
            votes,
            scores,
        })
    }
}

impl<T: Scalar + Serialize + for<'de> Deserialize<'de>> TrainedModel<T> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses a model, refusing any format version other than the current one.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let found = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::Parse("model file has no format_version".into()))?;
        if found != u64::from(MODEL_FORMAT_VERSION) {
            return Err(Error::VersionMismatch {
                found: u32::try_from(found).unwrap_or(u32::MAX),
                expected: MODEL_FORMAT_VERSION,
            });
        }
        let model: Self = serde_json::from_value(value)?;
        let k = model.classes.len();
        if model.pairs.len() != k * k.saturating_sub(1) / 2 {
            return Err(Error::Parse(format!(
                "{} pair models for {k} classes",
                model.pairs.len()
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clusters(k: usize, per: usize) -> LabeledDataset<f64> {
        let mut rows = Vec::new();
        for c in 0..k {
            let angle = c as f64 * std::f64::consts::TAU / k as f64;
            for i in 0..per {
                let jitter = (i as f64 * 1.7).sin() * 0.1;
                rows.push((
                    vec![3.0 * angle.cos() + jitter, 3.0 * angle.sin() - jitter],
                    format!("class{c}"),
                ));
            }
        }
        LabeledDataset::new(rows).unwrap()
    }

    #[test]
    fn pair_counts() {
        let p = SvmParams::new(10.0, 0.5);
        assert_eq!(train_multiclass(&clusters(2, 5), &p).unwrap().pairs.len(), 1);
        assert_eq!(train_multiclass(&clusters(5, 5), &p).unwrap().pairs.len(), 10);
    }

    #[test]
    fn predicts_cluster_members() {
        let data = clusters(5, 8);
        let m = train_multiclass(&data, &SvmParams::new(10.0, 0.5)).unwrap();
        for s in data.samples() {
            let p = m.predict(&s.features).unwrap();
            assert_eq!(p.class, s.class);
            let total: f64 = p.scores.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        assert!(matches!(m.predict(&[1.0]), Err(Error::Shape { .. })));
    }

    #[test]
    fn binary_model_follows_decision_sign() {
        let data = clusters(2, 6);
        let m = train_multiclass(&data, &SvmParams::new(1.0, 0.5)).unwrap();
        for probe in [[0.5, 0.1], [-1.0, 0.3], [2.0, -2.0], [0.0, 0.0]] {
            let f = m.pairs[0].svm.decision(&probe).unwrap();
            let p = m.predict(&probe).unwrap();
            if f > 0.0 {
                assert_eq!(p.class, 0);
            } else if f < 0.0 {
                assert_eq!(p.class, 1);
            }
        }
    }

    #[test]
    fn perfect_tie_goes_to_first_class() {
        let flat = |positive, negative| PairModel {
            positive,
            negative,
            svm: BinarySvm {
                support_vectors: vec![vec![0.0, 0.0]],
                coefficients: vec![0.0],
                bias: 0.0,
                gamma: 1.0,
                c: 1.0,
            },
            platt: Platt { a: -1.0, b: 0.0 },
        };
        let m = TrainedModel {
            format_version: MODEL_FORMAT_VERSION,
            classes: vec!["a".into(), "b".into(), "c".into()],
            dim: 2,
            c: 1.0,
            gamma: 1.0,
            pairs: vec![flat(0, 1), flat(0, 2), flat(1, 2)],
            feature_config: FeatureConfig::default(),
        };
        let p = m.predict(&[0.3, 0.3]).unwrap();
        assert_eq!(p.class, 0);
        assert_eq!(p.votes, vec![0, 0, 0]);
    }

    #[test]
    fn insufficient_class_is_named() {
        let mut rows: Vec<(Vec<f64>, String)> = (0..4).map(|i| (vec![i as f64], "big".into())).collect();
        rows.push((vec![9.0], "tiny".into()));
        let err = train_multiclass(&LabeledDataset::new(rows).unwrap(), &SvmParams::new(1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::InsufficientData { ref class, count: 1, .. } if class == "tiny"));
        let one: Vec<(Vec<f64>, String)> = (0..4).map(|i| (vec![i as f64], "only".into())).collect();
        assert!(matches!(
            train_multiclass(&LabeledDataset::new(one).unwrap(), &SvmParams::new(1.0, 1.0)),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn json_roundtrip_and_version_check() {
        let m = train_multiclass(&clusters(3, 4), &SvmParams::new(10.0, 0.5)).unwrap();
        let text = m.to_json().unwrap();
        let back = TrainedModel::<f64>::from_json(&text).unwrap();
        assert_eq!(back, m);

        let bumped = text.replacen("\"format_version\": 1", "\"format_version\": 7", 1);
        assert!(matches!(
            TrainedModel::<f64>::from_json(&bumped),
            Err(Error::VersionMismatch { found: 7, expected: 1 })
        ));
        assert!(TrainedModel::<f64>::from_json("{not json").is_err());
        assert!(TrainedModel::<f64>::from_json("{}").is_err());
    }
}
