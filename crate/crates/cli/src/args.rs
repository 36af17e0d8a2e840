use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use cold_core::config::PipelineConfig;

/// Handwriting nationality identification from text-line shape features.
#[derive(Debug, Parser)]
#[command(name = "coldid", version)]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Pipeline settings. Flags override `--config`, which overrides defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON file with any subset of the pipeline settings.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub hpp_thresh: Option<f64>,
    #[arg(long, global = true)]
    pub angle_thresh: Option<f64>,
    #[arg(long, global = true)]
    pub valley_frac: Option<f64>,
    #[arg(long, global = true)]
    pub min_gap: Option<usize>,
    #[arg(long, global = true)]
    pub ruled_frac: Option<f64>,
    #[arg(long, global = true)]
    pub canny_sigma: Option<f64>,
    #[arg(long, global = true)]
    pub canny_low: Option<f64>,
    #[arg(long, global = true)]
    pub canny_high: Option<f64>,
    #[arg(long, global = true)]
    pub rdp_epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub plane_radius: Option<f64>,
    #[arg(long, global = true)]
    pub bins: Option<usize>,
    #[arg(long, global = true)]
    pub c: Option<f64>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub folds: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl ConfigArgs {
    /// Defaults, then the config file, then explicit flags; validated.
    pub fn resolve(&self) -> cold_core::Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::from_json(&cold_core::io::read_to_string(path)?)?,
            None => PipelineConfig::default(),
        };
        macro_rules! overlay {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        overlay!(
            hpp_thresh, angle_thresh, valley_frac, min_gap, ruled_frac, canny_sigma, canny_low, canny_high,
            rdp_epsilon, plane_radius, bins, c, gamma, folds, seed
        );
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment page images into cleaned line crops.
    Preprocess {
        /// CSV with header `path,label,writer`.
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Compute one feature row per line image.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        /// Headerless CSV, one `label,v1,...,vK` row per image.
        #[arg(long)]
        out: PathBuf,
        /// Also write edge maps (PGM), dominant points and distributions here.
        #[arg(long)]
        dump_dir: Option<PathBuf>,
    },
    /// Render the polar distribution of a line image, or one merged plot
    /// per class of a manifest.
    Plot {
        /// A line image, or a `.csv` manifest.
        #[arg(long)]
        input: PathBuf,
        /// Output PNG for an image; output directory for a manifest.
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validate, then fit on all rows and save the model.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Evaluate on one stratified split with this test fraction
        /// instead of k-fold.
        #[arg(long)]
        holdout: Option<f64>,
        /// Pick C and gamma by grid search with this many evaluations.
        #[arg(long)]
        search: Option<usize>,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Classify line images; prints `path,label,p1,...,pK` per input.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Write the synthetic corpus: line images per class plus a manifest,
    /// and optionally synthetic pages.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 100)]
        per_class: usize,
        #[arg(long, default_value_t = 10)]
        writers: usize,
        /// Number of 3-line pages to add under `pages/`.
        #[arg(long, default_value_t = 0)]
        pages: usize,
        /// Draw rules on the pages.
        #[arg(long)]
        ruled: bool,
    },
}
