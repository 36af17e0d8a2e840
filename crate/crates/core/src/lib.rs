//! Handwriting nationality identification from Cloud of Line Distribution
//! (COLD) features.
//!
//! The pipeline cleans a scanned page and cuts it into text lines
//! ([`preproc`]), reduces each line's Canny contours to dominant points
//! ([`contour`]), turns every pair of adjacent dominant points into a polar
//! `(angle, length)` point ([`cold`]), measures the shape of that cloud
//! around its principal axis ([`features`]) and classifies the result with
//! a one-vs-one Gaussian SVM ([`classify`]).
//!
//! Numeric kernels are generic over [`Scalar`] (`f32`, `f64`); the aliases
//! below fix the `f64` instantiation used by the pipeline and file formats.

// `!(x > 0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod cold;
pub mod config;
pub mod contour;
pub mod error;
pub mod features;
pub mod io;
pub mod pipeline;
pub mod preproc;
pub mod raster;
pub mod scalar;
pub mod synth;

pub use error::{Error, Result};
pub use raster::{GrayImage, Pixel};
pub use scalar::Scalar;

pub type PolarPoint = cold::PolarPoint<f64>;
pub type ColdDistribution = cold::ColdDistribution<f64>;
pub type PrincipalAxis = features::PrincipalAxis<f64>;
pub type ScanRecord = features::ScanRecord<f64>;
pub type FeatureVector = features::FeatureVector<f64>;
pub type LabeledDataset = classify::LabeledDataset<f64>;
pub type BinarySvm = classify::BinarySvm<f64>;
pub type TrainedModel = classify::TrainedModel<f64>;
pub type SvmParams = classify::SvmParams<f64>;

pub type FeatureVectorF32 = features::FeatureVector<f32>;
pub type LabeledDatasetF32 = classify::LabeledDataset<f32>;
pub type TrainedModelF32 = classify::TrainedModel<f32>;
