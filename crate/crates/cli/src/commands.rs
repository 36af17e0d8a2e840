use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use cold_core::classify::{
    cross_validate, hyperparameter_search, train_multiclass, ConfusionMatrix, EvalMode, GridSearch, LabeledDataset,
};
use cold_core::cold::{merge, render_plot};
use cold_core::config::PipelineConfig;
use cold_core::io::write_atomic;
use cold_core::pipeline::{analyze_line, FeatureConfig, LineAnalysis};
use cold_core::preproc::preprocess_page;
use cold_core::synth::{corpus, synth_page, PageLayout};
use cold_core::{ColdDistribution, GrayImage, TrainedModel};

use crate::manifest::{manifest_bytes, read_manifest, ManifestRow};

/// Bad flags, config or command usage; maps to exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowFailure {
    pub path: PathBuf,
    pub error: String,
}

fn failure(path: &Path, e: impl std::fmt::Display) -> RowFailure {
    RowFailure {
        path: path.to_path_buf(),
        error: e.to_string(),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "image".into(), |s| s.to_string_lossy().into_owned())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineReport {
    pub crop: PathBuf,
    pub y_start: usize,
    pub y_end: usize,
    pub rule_rows: Vec<usize>,
    pub rule_pixels_erased: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageReport {
    pub source: PathBuf,
    pub label: String,
    pub baseline_pixels_erased: usize,
    pub lines: Vec<LineReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreprocessReport {
    pub images: Vec<ImageReport>,
    pub failures: Vec<RowFailure>,
}

/// Writes `<stem>_line<i>.png` crops, `report.json` and a `lines.csv`
/// manifest of the crops into `out_dir`.
pub fn cmd_preprocess(manifest: &Path, out_dir: &Path, cfg: &PipelineConfig) -> Result<PreprocessReport> {
    let rows = read_manifest(manifest)?;
    let mut seen = HashSet::new();
    if let Some(dup) = rows.iter().map(|r| stem(&r.path)).find(|s| !seen.insert(s.clone())) {
        return Err(UsageError(format!("{}: two images share the file stem `{dup}`", manifest.display())).into());
    }
    create_dir(out_dir)?;
    let params = cfg.preprocess();
    let results: Vec<std::result::Result<(ImageReport, Vec<ManifestRow>), RowFailure>> = rows
        .par_iter()
        .map(|row| {
            let img = GrayImage::load(&row.path).map_err(|e| failure(&row.path, e))?;
            let page = preprocess_page(&img, &params).map_err(|e| failure(&row.path, e))?;
            let stem = stem(&row.path);
            let mut lines = Vec::with_capacity(page.lines.len());
            let mut crops = Vec::with_capacity(page.lines.len());
            for (i, (line, stats)) in page.lines.iter().zip(&page.rule_stats).enumerate() {
                let crop = out_dir.join(format!("{stem}_line{i}.png"));
                line.crop.save_png(&crop).map_err(|e| failure(&row.path, e))?;
                lines.push(LineReport {
                    crop: crop.clone(),
                    y_start: line.y_start,
                    y_end: line.y_end,
                    rule_rows: stats.rule_rows.clone(),
                    rule_pixels_erased: stats.erased_pixels,
                });
                crops.push(ManifestRow {
                    path: crop,
                    label: row.label.clone(),
                    writer: row.writer.clone(),
                });
            }
            let warning = lines.is_empty().then(|| "no text lines found".to_string());
            if let Some(w) = &warning {
                log::warn!("{}: {w}", row.path.display());
            }
            Ok((
                ImageReport {
                    source: row.path.clone(),
                    label: row.label.clone(),
                    baseline_pixels_erased: page.baseline_pixels,
                    lines,
                    warning,
                },
                crops,
            ))
        })
        .collect();

    let mut report = PreprocessReport {
        images: Vec::new(),
        failures: Vec::new(),
    };
    let mut crops = Vec::new();
    for r in results {
        match r {
            Ok((img, rows)) => {
                report.images.push(img);
                crops.extend(rows);
            }
            Err(f) => {
                log::error!("{}: {}", f.path.display(), f.error);
                report.failures.push(f);
            }
        }
    }
    write_atomic(&out_dir.join("lines.csv"), &manifest_bytes(&crops, out_dir)?)?;
    write_atomic(&out_dir.join("report.json"), serde_json::to_string_pretty(&report)?.as_bytes())?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractReport {
    pub rows: usize,
    pub warnings: Vec<RowFailure>,
    pub failures: Vec<RowFailure>,
}

fn dump_analysis(dir: &Path, stem: &str, a: &LineAnalysis<f64>) -> cold_core::Result<()> {
    use cold_core::io::write_atomic;
    a.edges.to_gray().save_pgm(&dir.join(format!("{stem}_edges.pgm")))?;
    let mut pts = String::new();
    for (i, d) in a.dominant.iter().enumerate() {
        if i > 0 {
            pts.push('\n');
        }
        for p in &d.points {
            let _ = writeln!(pts, "{},{}", p.x, p.y);
        }
    }
    write_atomic(&dir.join(format!("{stem}_dominant.txt")), pts.as_bytes())?;
    write_atomic(&dir.join(format!("{stem}_cold.txt")), a.distribution.to_dump_string().as_bytes())
}

/// One headerless `label,v1,...,vK` row per readable manifest image.
pub fn cmd_extract(manifest: &Path, out: &Path, dump_dir: Option<&Path>, cfg: &PipelineConfig) -> Result<ExtractReport> {
    let rows = read_manifest(manifest)?;
    if let Some(d) = dump_dir {
        create_dir(d)?;
    }
    let features = cfg.features();
    let results: Vec<std::result::Result<(String, Option<String>), RowFailure>> = rows
        .par_iter()
        .map(|row| {
            let img = GrayImage::load(&row.path).map_err(|e| failure(&row.path, e))?;
            let a = analyze_line::<f64>(&img, &features).map_err(|e| failure(&row.path, e))?;
            if let Some(d) = dump_dir {
                dump_analysis(d, &stem(&row.path), &a).map_err(|e| failure(&row.path, e))?;
            }
            let mut line = csv_field(&row.label);
            for v in a.features.as_slice() {
                let _ = write!(line, ",{v}");
            }
            line.push('\n');
            Ok((line, a.warning))
        })
        .collect();
    let mut text = String::new();
    let mut report = ExtractReport {
        rows: 0,
        warnings: Vec::new(),
        failures: Vec::new(),
    };
    for (row, r) in rows.iter().zip(results) {
        match r {
            Ok((line, warning)) => {
                text.push_str(&line);
                report.rows += 1;
                if let Some(w) = warning {
                    log::warn!("{}: {w}", row.path.display());
                    report.warnings.push(failure(&row.path, w));
                }
            }
            Err(f) => {
                log::error!("{}: {}", f.path.display(), f.error);
                report.failures.push(f);
            }
        }
    }
    write_atomic(out, text.as_bytes())?;
    Ok(report)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Reads a headerless `label,v1,...,vK` feature CSV.
pub fn read_features(path: &Path) -> Result<LabeledDataset<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("reading features {}", path.display()))?;
    let mut rows = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: row {}", path.display(), n + 1))?;
        let mut fields = rec.iter();
        let label = fields.next().unwrap_or_default().to_string();
        let values = fields
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("{}: row {} has a non-numeric value", path.display(), n + 1))?;
        rows.push((values, label));
    }
    if rows.is_empty() {
        bail!("{}: no feature rows", path.display());
    }
    Ok(LabeledDataset::new(rows)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotReport {
    pub written: Vec<PathBuf>,
    pub warnings: Vec<RowFailure>,
    pub failures: Vec<RowFailure>,
}

fn file_safe(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Plots one line image, or one merged distribution per manifest class.
pub fn cmd_plot(input: &Path, out: &Path, cfg: &PipelineConfig) -> Result<PlotReport> {
    let features = cfg.features();
    let radius = features.plane_radius;
    let mut report = PlotReport {
        written: Vec::new(),
        warnings: Vec::new(),
        failures: Vec::new(),
    };
    if input.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let rows = read_manifest(input)?;
        create_dir(out)?;
        let analysed: Vec<_> = rows
            .par_iter()
            .map(|row| {
                GrayImage::load(&row.path)
                    .and_then(|img| analyze_line::<f64>(&img, &features))
                    .map_err(|e| failure(&row.path, e))
            })
            .collect();
        let mut classes: BTreeMap<&str, ColdDistribution> = BTreeMap::new();
        for (row, a) in rows.iter().zip(analysed) {
            let merged = classes
                .entry(row.label.as_str())
                .or_insert_with(|| ColdDistribution::empty(radius));
            match a {
                Ok(a) => *merged = merge(merged, &a.distribution)?,
                Err(f) => report.failures.push(f),
            }
        }
        for (label, d) in classes {
            let path = out.join(format!("{}.png", file_safe(label)));
            if d.is_empty() {
                log::warn!("class `{label}` has no segments; plotting axes only");
                report.warnings.push(failure(&path, format!("class `{label}` has no segments")));
            }
            render_plot(&d, &path)?;
            report.written.push(path);
        }
    } else {
        let img = GrayImage::load(input)?;
        let a = analyze_line::<f64>(&img, &features)?;
        if let Some(w) = a.warning {
            log::warn!("{}: {w}", input.display());
            report.warnings.push(failure(input, w));
        }
        render_plot(&a.distribution, out)?;
        report.written.push(out.to_path_buf());
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub text: String,
    pub matrix: ConfusionMatrix,
    pub classification_rate: f64,
    pub c: f64,
    pub gamma: f64,
}

/// Evaluates with cross validation (or a holdout split), then fits on every
/// row and saves the model with the feature settings it expects.
pub fn cmd_train(
    features: &Path,
    model_path: &Path,
    holdout: Option<f64>,
    search: Option<usize>,
    cfg: &PipelineConfig,
) -> Result<(TrainReport, TrainedModel)> {
    let data = read_features(features)?;
    if data.classes().len() < 2 {
        bail!("{}: need at least 2 classes, found {}", features.display(), data.classes().len());
    }
    if data.dim() != cfg.bins {
        return Err(UsageError(format!(
            "{}: rows have {} values but bins is {}",
            features.display(),
            data.dim(),
            cfg.bins
        ))
        .into());
    }
    let mode = match holdout {
        Some(test_fraction) => EvalMode::Holdout { test_fraction },
        None => EvalMode::KFold(cfg.folds),
    };
    let mut text = String::new();
    let mut params = cfg.svm();
    if let Some(budget) = search {
        let found = hyperparameter_search(&data, budget, mode, cfg.seed, &mut GridSearch::default())?;
        let _ = writeln!(text, "search: {} evaluations", found.history.len());
        for e in &found.history {
            let _ = writeln!(text, "  C={} gamma={} CR={:.2}", e.c, e.gamma, e.cr);
        }
        params.c = found.best.c;
        params.gamma = found.best.gamma;
    }
    let matrix = cross_validate(&data, mode, &params, cfg.seed)?;
    let cr = matrix.classification_rate()?;
    let eval = match mode {
        EvalMode::KFold(k) => format!("{k}-fold cross validation"),
        EvalMode::Holdout { test_fraction } => format!("holdout, test fraction {test_fraction}"),
    };
    let _ = writeln!(
        text,
        "samples: {}  classes: {}  dim: {}\nevaluation: {eval}, seed {}\nC: {}  gamma: {}\n",
        data.len(),
        data.classes().len(),
        data.dim(),
        cfg.seed,
        params.c,
        params.gamma
    );
    text.push_str(&matrix.render_table());
    let model = train_multiclass(&data, &params)?.with_feature_config(cfg.features());
    model.save(model_path)?;
    Ok((
        TrainReport {
            text,
            matrix,
            classification_rate: cr,
            c: params.c,
            gamma: params.gamma,
        },
        model,
    ))
}

fn config_diff(model: &FeatureConfig, flags: &FeatureConfig) -> Vec<String> {
    let mut diff = Vec::new();
    let mut check = |name: &str, a: String, b: String| {
        if a != b {
            diff.push(format!("{name}: model {a}, flags {b}"));
        }
    };
    check("canny_sigma", model.canny.sigma.to_string(), flags.canny.sigma.to_string());
    check("canny_low", model.canny.low.to_string(), flags.canny.low.to_string());
    check("canny_high", model.canny.high.to_string(), flags.canny.high.to_string());
    check("rdp_epsilon", model.rdp_epsilon.to_string(), flags.rdp_epsilon.to_string());
    check("plane_radius", model.plane_radius.to_string(), flags.plane_radius.to_string());
    check("bins", model.bins.to_string(), flags.bins.to_string());
    diff
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictRow {
    pub path: PathBuf,
    pub label: String,
    pub scores: Vec<f64>,
}

impl PredictRow {
    pub fn to_line(&self) -> String {
        let mut s = format!("{},{}", csv_field(&self.path.to_string_lossy()), csv_field(&self.label));
        for p in &self.scores {
            let _ = write!(s, ",{p}");
        }
        s
    }
}

/// Predicts each input; refuses when the model was built with different
/// feature settings than the current flags.
pub fn cmd_predict(model_path: &Path, inputs: &[PathBuf], cfg: &PipelineConfig) -> Result<(Vec<PredictRow>, Vec<RowFailure>)> {
    if inputs.is_empty() {
        return Err(UsageError("predict needs at least one input image".into()).into());
    }
    let model = TrainedModel::load(model_path)?;
    let diff = config_diff(&model.feature_config, &cfg.features());
    if !diff.is_empty() {
        return Err(UsageError(format!(
            "feature settings differ from the model's:\n  {}",
            diff.join("\n  ")
        ))
        .into());
    }
    let features = model.feature_config;
    let results: Vec<_> = inputs
        .par_iter()
        .map(|path| {
            let img = GrayImage::load(path).map_err(|e| failure(path, e))?;
            let a = analyze_line::<f64>(&img, &features).map_err(|e| failure(path, e))?;
            if let Some(w) = &a.warning {
                log::warn!("{}: {w}", path.display());
            }
            let p = model.predict(a.features.as_slice()).map_err(|e| failure(path, e))?;
            Ok::<_, RowFailure>(PredictRow {
                path: path.clone(),
                label: p.label,
                scores: p.scores,
            })
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(f) => {
                log::error!("{}: {}", f.path.display(), f.error);
                failures.push(f);
            }
        }
    }
    Ok((rows, failures))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthReport {
    pub lines: usize,
    pub pages: usize,
}

/// Writes `lines/*.png` with `lines.csv`, and `pages/*.png` with
/// `pages.csv` when pages are requested.
pub fn cmd_synth(out_dir: &Path, per_class: usize, writers: usize, pages: usize, ruled: bool, seed: u64) -> Result<SynthReport> {
    if per_class == 0 || writers == 0 {
        return Err(UsageError("per-class and writers must be >= 1".into()).into());
    }
    let line_dir = out_dir.join("lines");
    create_dir(&line_dir)?;
    let lines = corpus(per_class, writers, seed);
    let rows = lines
        .par_iter()
        .map(|l| {
            let path = line_dir.join(format!("{}_w{}_{:03}.png", l.class.name(), l.writer, l.index));
            l.image.save_png(&path)?;
            Ok(ManifestRow {
                path,
                label: l.class.name().to_string(),
                writer: Some(format!("{}{}", l.class.name(), l.writer)),
            })
        })
        .collect::<cold_core::Result<Vec<_>>>()?;
    write_atomic(&out_dir.join("lines.csv"), &manifest_bytes(&rows, out_dir)?)?;

    if pages > 0 {
        let page_dir = out_dir.join("pages");
        create_dir(&page_dir)?;
        let layout = PageLayout {
            ruled,
            ..PageLayout::default()
        };
        let rows = (0..pages)
            .into_par_iter()
            .map(|i| {
                let page = synth_page(&layout, seed.wrapping_add(i as u64))?;
                let path = page_dir.join(format!("page_{i:03}.png"));
                page.image.save_png(&path)?;
                let label = page.classes.iter().map(|c| c.name()).collect::<Vec<_>>().join("+");
                Ok(ManifestRow {
                    path,
                    label,
                    writer: None,
                })
            })
            .collect::<cold_core::Result<Vec<_>>>()?;
        write_atomic(&out_dir.join("pages.csv"), &manifest_bytes(&rows, out_dir)?)?;
    }
    Ok(SynthReport {
        lines: lines.len(),
        pages,
    })
}

/// Maps an error to the documented exit code: 2 for usage or config, else 1.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<cold_core::Error>() {
        Some(cold_core::Error::Config(_)) => 2,
        _ => 1,
    }
}

pub(crate) fn no_rows(what: &str) -> anyhow::Error {
    anyhow!("every {what} failed")
}
