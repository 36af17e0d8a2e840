//! Line image to feature vector: edges, contours, dominant points, segment
//! pairs, distribution, raster, principal axis, scan, bins.

use serde::{Deserialize, Serialize};

use crate::cold::{build_distribution, ColdDistribution, DEFAULT_PLANE_RADIUS};
use crate::contour::{
    canny_edges, dominant_points, segment_pairs, trace_contours, CannyParams, DominantPointSet, EdgeMap, SegmentPair,
};
use crate::error::{Error, Result};
use crate::features::{
    principal_axis, rasterize, reference_span, scan_profile, to_feature_vector_over, FeatureVector, DEFAULT_BINS,
};
use crate::raster::GrayImage;
use crate::scalar::Scalar;

/// Settings that determine a feature vector; stored with trained models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub canny: CannyParams,
    pub rdp_epsilon: f64,
    pub plane_radius: f64,
    pub bins: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            canny: CannyParams::default(),
            rdp_epsilon: 2.0,
            plane_radius: DEFAULT_PLANE_RADIUS,
            bins: DEFAULT_BINS,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        self.canny.validate()?;
        if !(self.rdp_epsilon > 0.0) {
            return Err(Error::Config(format!("rdp epsilon must be > 0, got {}", self.rdp_epsilon)));
        }
        if !(self.plane_radius >= 1.0) {
            return Err(Error::Config(format!("plane radius must be >= 1, got {}", self.plane_radius)));
        }
        if self.bins == 0 {
            return Err(Error::Config("feature bins must be >= 1".into()));
        }
        Ok(())
    }
}

/// Every intermediate product for one line image.
#[derive(Debug, Clone)]
pub struct LineAnalysis<T> {
    pub edges: EdgeMap,
    pub dominant: Vec<DominantPointSet<T>>,
    pub pairs: Vec<SegmentPair>,
    pub distribution: ColdDistribution<T>,
    pub features: FeatureVector<T>,
    /// Set when the line produced no usable distribution.
    pub warning: Option<String>,
}

/// Edges, dominant points and segment pairs of a line image.
pub fn line_segments<T: Scalar>(
    img: &GrayImage,
    config: &FeatureConfig,
) -> Result<(EdgeMap, Vec<DominantPointSet<T>>, Vec<SegmentPair>)> {
    let edges = canny_edges(img, &config.canny)?;
    let mut dominant = Vec::new();
    let mut pairs = Vec::new();
    for contour in trace_contours(&edges) {
        if contour.len() < 2 {
            continue;
        }
        let d = match dominant_points(&contour, T::of(config.rdp_epsilon)) {
            Ok(d) => d,
            Err(Error::InvalidContour(_)) => continue,
            Err(e) => return Err(e),
        };
        pairs.extend(segment_pairs(&d));
        dominant.push(d);
    }
    Ok((edges, dominant, pairs))
}

/// Features of a distribution, binned along the reference line. Empty or
/// degenerate distributions give the zero vector and a warning.
pub fn distribution_features<T: Scalar>(
    distribution: &ColdDistribution<T>,
    bins: usize,
) -> Result<(FeatureVector<T>, Option<String>)> {
    let raster = rasterize(distribution);
    match principal_axis::<T>(&raster) {
        Ok(axis) => {
            let records = scan_profile(&raster, &axis);
            let span = reference_span(&raster, &axis).unwrap_or((T::zero(), T::zero()));
            Ok((to_feature_vector_over(&records, span, bins, distribution.plane_radius())?, None))
        }
        Err(Error::DegenerateDistribution(why)) => {
            if bins == 0 {
                return Err(Error::Config("feature bins must be >= 1".into()));
            }
            Ok((FeatureVector::zeros(bins), Some(format!("degenerate distribution: {why}"))))
        }
        Err(e) => Err(e),
    }
}

pub fn analyze_line<T: Scalar>(img: &GrayImage, config: &FeatureConfig) -> Result<LineAnalysis<T>> {
    config.validate()?;
    let (edges, dominant, pairs) = line_segments::<T>(img, config)?;
    let radius = T::of(config.plane_radius);
    let distribution = if pairs.is_empty() {
        ColdDistribution::empty(radius)
    } else {
        build_distribution(&pairs, radius)?
    };
    let (features, mut warning) = distribution_features(&distribution, config.bins)?;
    if pairs.is_empty() {
        warning = Some("no segment pairs: empty distribution".into());
    }
    Ok(LineAnalysis {
        edges,
        dominant,
        pairs,
        distribution,
        features,
        warning,
    })
}
