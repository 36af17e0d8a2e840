//! Flat, serialisable set of every pipeline tunable.

use serde::{Deserialize, Serialize};

use crate::classify::SvmParams;
use crate::contour::CannyParams;
use crate::error::{Error, Result};
use crate::pipeline::FeatureConfig;
use crate::preproc::{BaselineParams, PreprocessParams, RuleParams, SegmentParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub hpp_thresh: f64,
    pub angle_thresh: f64,
    pub valley_frac: f64,
    pub min_gap: usize,
    pub ruled_frac: f64,
    pub canny_sigma: f64,
    pub canny_low: f64,
    pub canny_high: f64,
    pub rdp_epsilon: f64,
    pub plane_radius: f64,
    pub bins: usize,
    pub c: f64,
    pub gamma: f64,
    pub folds: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let baseline = BaselineParams::default();
        let segment = SegmentParams::default();
        let canny = CannyParams::default();
        let features = FeatureConfig::default();
        Self {
            hpp_thresh: baseline.hpp_thresh,
            angle_thresh: baseline.angle_thresh,
            valley_frac: segment.valley_frac,
            min_gap: segment.min_gap,
            ruled_frac: RuleParams::default().ruled_frac,
            canny_sigma: canny.sigma,
            canny_low: canny.low,
            canny_high: canny.high,
            rdp_epsilon: features.rdp_epsilon,
            plane_radius: features.plane_radius,
            bins: features.bins,
            c: DEFAULT_C,
            gamma: DEFAULT_GAMMA,
            folds: 10,
            seed: 0,
        }
    }
}

pub const DEFAULT_C: f64 = 10.0;
pub const DEFAULT_GAMMA: f64 = 5.0;

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn canny(&self) -> CannyParams {
        CannyParams {
            sigma: self.canny_sigma,
            low: self.canny_low,
            high: self.canny_high,
        }
    }

    pub fn preprocess(&self) -> PreprocessParams {
        PreprocessParams {
            baseline: BaselineParams {
                hpp_thresh: self.hpp_thresh,
                angle_thresh: self.angle_thresh,
            },
            segment: SegmentParams {
                valley_frac: self.valley_frac,
                min_gap: self.min_gap,
                ..SegmentParams::default()
            },
            rule: RuleParams {
                ruled_frac: self.ruled_frac,
                angle_thresh: self.angle_thresh,
                ..RuleParams::default()
            },
            canny: self.canny(),
        }
    }

    pub fn features(&self) -> FeatureConfig {
        FeatureConfig {
            canny: self.canny(),
            rdp_epsilon: self.rdp_epsilon,
            plane_radius: self.plane_radius,
            bins: self.bins,
        }
    }

    pub fn svm(&self) -> SvmParams<f64> {
        SvmParams::new(self.c, self.gamma)
    }

    pub fn validate(&self) -> Result<()> {
        let pre = self.preprocess();
        pre.baseline.validate()?;
        pre.segment.validate()?;
        if !(self.ruled_frac > 0.0 && self.ruled_frac <= 1.0) {
            return Err(Error::Config(format!("ruled fraction must lie in (0, 1], got {}", self.ruled_frac)));
        }
        self.features().validate()?;
        self.svm().validate()?;
        if self.folds < 2 {
            return Err(Error::Config(format!("need at least 2 folds, got {}", self.folds)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_roundtrip() {
        let cfg = PipelineConfig::default();
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(PipelineConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg = PipelineConfig::from_json(r#"{"bins": 32, "seed": 9}"#).unwrap();
        assert_eq!(cfg.bins, 32);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.c, DEFAULT_C);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(PipelineConfig::from_json(r#"{"hpp_thresh": 400}"#).is_err());
        assert!(PipelineConfig::from_json(r#"{"canny_low": 200}"#).is_err());
        assert!(PipelineConfig::from_json(r#"{"unknown": 1}"#).is_err());
        assert!(PipelineConfig::from_json(r#"{"folds": 1}"#).is_err());
    }
}
