//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cold_cli::commands::{cmd_extract, cmd_synth, cmd_train};
use cold_core::classify::{
    cross_validate, gram_matrix, train_binary, ConfusionMatrix, EvalMode, LabeledDataset, SvmParams,
};
use cold_core::cold::{build_distribution, to_polar, Segment};
use cold_core::config::PipelineConfig;
use cold_core::contour::{dominant_points, segment_pairs, Contour, SegmentPair};
use cold_core::features::{principal_axis, reference_span, scan_profile, to_feature_vector_over, ColdRaster};
use cold_core::pipeline::{analyze_line, distribution_features, FeatureConfig};
use cold_core::preproc::{preprocess_page, PreprocessParams};
use cold_core::synth::{corpus, synth_line, synth_page, PageLayout, ScriptClass};
use cold_core::Pixel;
use cold_oracles::{brute_force_dual, hand_polar, naive_rdp};

type Verdict = Result<String, String>;

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    if took < limit {
        Ok(took)
    } else {
        Err(format!("took {took:.2?}, limit {limit:?}"))
    }
}

fn geometry_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0f64;
    let mut n = 0;
    while n < 100 {
        let a = Pixel::new(rng.gen_range(-1000..1000), rng.gen_range(-1000..1000));
        let b = Pixel::new(rng.gen_range(-1000..1000), rng.gen_range(-1000..1000));
        if a == b {
            continue;
        }
        n += 1;
        let p = to_polar::<f64, _>(&SegmentPair { a, b }).map_err(|e| e.to_string())?;
        let (theta, r) = hand_polar(f64::from(b.x - a.x), f64::from(b.y - a.y));
        worst = worst.max((p.theta - theta).abs()).max((p.r - r).abs());
    }
    let took = within(Duration::from_secs(1), start)?;
    if worst <= 1e-9 {
        Ok(format!("100 pairs, max error {worst:.1e}, {took:.2?}"))
    } else {
        Err(format!("max error {worst:e}"))
    }
}

fn rdp_equivalence() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let dirs = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
    for case in 0..50 {
        let n = rng.gen_range(2..120);
        // Even cases scatter points; odd cases are 8-connected pen walks.
        let mut pts: Vec<Pixel> = Vec::with_capacity(n);
        let mut here = Pixel::new(0, 0);
        let mut heading = 0usize;
        for _ in 0..n {
            if case % 2 == 0 {
                pts.push(Pixel::new(rng.gen_range(-60..60), rng.gen_range(-60..60)));
            } else {
                heading = (heading + rng.gen_range(0..3) + 7) % 8;
                here = Pixel::new(here.x + dirs[heading].0, here.y + dirs[heading].1);
                pts.push(here);
            }
        }
        if pts.iter().all(|&p| p == pts[0]) {
            pts.push(Pixel::new(pts[0].x + 1, pts[0].y));
        }
        let got = dominant_points(&Contour::open(pts.clone()), 2.0f64).map_err(|e| e.to_string())?;
        let got: Vec<(i64, i64)> = got.points.iter().map(|p| (i64::from(p.x), i64::from(p.y))).collect();
        let want = naive_rdp(&pts.iter().map(|p| (i64::from(p.x), i64::from(p.y))).collect::<Vec<_>>(), 2, 1);
        if got != want {
            return Err(format!("polyline {case}: {} points vs oracle {}", got.len(), want.len()));
        }
    }
    let took = within(Duration::from_secs(5), start)?;
    Ok(format!("50 polylines identical, {took:.2?}"))
}

fn line_angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(180.0);
    d.min(180.0 - d)
}

/// Strokes of one synthetic line with coordinates on a 1/1024 grid, so
/// shifting by whole pixels is exact in floating point.
fn dyadic_segments(class: ScriptClass, writer: usize, index: usize) -> Vec<Segment<f64>> {
    let q = |v: f64| (v * 1024.0).round() / 1024.0;
    synth_line(class, writer, index, 11)
        .strokes
        .iter()
        .flat_map(|s| s.segments().collect::<Vec<_>>())
        .map(|s| Segment {
            a: [q(s.a[0]), q(s.a[1])],
            b: [q(s.b[0]), q(s.b[1])],
        })
        .filter(|s| s.a != s.b)
        .collect()
}

fn transformed(segs: &[Segment<f64>], f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<Segment<f64>> {
    segs.iter().map(|s| Segment { a: f(s.a), b: f(s.b) }).collect()
}

fn sorted_r(segs: &[Segment<f64>]) -> Result<Vec<f64>, String> {
    let d = build_distribution(segs, 150.0).map_err(|e| e.to_string())?;
    let mut r: Vec<f64> = d.points().iter().map(|p| p.r).collect();
    r.sort_by(f64::total_cmp);
    Ok(r)
}

/// Pairs of adjacent dominant points of the strokes turned by `deg`, the
/// way the pipeline forms pairs; points are simplified at 1024x scale.
fn dominant_pairs(class: ScriptClass, writer: usize, index: usize, deg: f64) -> Vec<SegmentPair> {
    let (sn, cs) = deg.to_radians().sin_cos();
    let mut pairs = Vec::new();
    for stroke in &synth_line(class, writer, index, 11).strokes {
        let pts: Vec<Pixel> = stroke
            .points
            .iter()
            .map(|p| {
                let (x, y) = (cs * p[0] - sn * p[1], sn * p[0] + cs * p[1]);
                Pixel::new((x * 1024.0).round() as i32, (y * 1024.0).round() as i32)
            })
            .collect();
        if let Ok(d) = dominant_points(&Contour::open(pts), 2048.0f64) {
            pairs.extend(segment_pairs(&d));
        }
    }
    pairs
}

fn features_of(pairs: &[SegmentPair]) -> Result<Vec<f64>, String> {
    let d = build_distribution(pairs, 150.0f64).map_err(|e| e.to_string())?;
    let (f, _) = distribution_features(&d, 64).map_err(|e| e.to_string())?;
    Ok(f.into_vec())
}

fn invariance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut rot_gap, mut scale_err, mut bin_change, mut mean_change) = (0f64, 0f64, 0f64, 0f64);
    let mut lines = 0;
    for &class in &ScriptClass::ALL {
        for index in 0..4 {
            let segs = dyadic_segments(class, index % 2, index);
            lines += 1;
            let (tx, ty) = (f64::from(rng.gen_range(-500..500)), f64::from(rng.gen_range(-500..500)));
            let shifted = transformed(&segs, |p| [p[0] + tx, p[1] + ty]);
            for (s, t) in segs.iter().zip(&shifted) {
                let (p, q) = (to_polar::<f64, _>(s).unwrap(), to_polar::<f64, _>(t).unwrap());
                if p != q {
                    return Err(format!("translation changed {p:?} to {q:?}"));
                }
            }

            let alpha: f64 = rng.gen_range(-180.0..180.0);
            let (sn, cs) = alpha.to_radians().sin_cos();
            let rotated = transformed(&segs, |p| [cs * p[0] - sn * p[1], sn * p[0] + cs * p[1]]);
            for (s, t) in segs.iter().zip(&rotated) {
                let (p, q) = (to_polar::<f64, _>(s).unwrap(), to_polar::<f64, _>(t).unwrap());
                if !(-90.0..=90.0).contains(&q.theta) {
                    return Err(format!("theta {} outside [-90, 90]", q.theta));
                }
                rot_gap = rot_gap.max(line_angle_gap(q.theta, p.theta + alpha));
            }

            let k: f64 = rng.gen_range(0.1..10.0);
            let (a, b) = (sorted_r(&segs)?, sorted_r(&transformed(&segs, |p| [p[0] * k, p[1] * k]))?);
            for (x, y) in a.iter().zip(&b) {
                scale_err = scale_err.max((x - y).abs() / x.abs().max(f64::MIN_POSITIVE));
            }

            let f = features_of(&dominant_pairs(class, index % 2, index, 0.0))?;
            let g = features_of(&dominant_pairs(class, index % 2, index, 15.0))?;
            let change: Vec<f64> = f.iter().zip(&g).map(|(x, y)| (x - y).abs()).collect();
            bin_change = change.iter().copied().fold(bin_change, f64::max);
            mean_change = mean_change.max(change.iter().sum::<f64>() / change.len() as f64);
        }
    }
    let detail = format!(
        "{lines} lines: translation exact, rotation gap {rot_gap:.1e} deg, scale error {scale_err:.1e}, 15-deg bin change max {bin_change:.4} (worst line mean {mean_change:.4})"
    );
    if rot_gap <= 1e-9 && scale_err <= 1e-9 && bin_change <= 0.05 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn symmetry_null() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..200 {
        let mut raster = ColdRaster::new(150);
        let n = rng.gen_range(20..400);
        for _ in 0..n {
            let (u, v) = (rng.gen_range(-140i64..140), rng.gen_range(1i64..40));
            match case % 3 {
                0 => {
                    raster.set(u, v, true);
                    raster.set(u, -v, true);
                }
                1 => {
                    raster.set(v, u, true);
                    raster.set(-v, u, true);
                }
                _ => {
                    let (x, y) = (u - v / 2, u + v / 2 + 1);
                    raster.set(x, y, true);
                    raster.set(y, x, true);
                }
            }
        }
        let axis = principal_axis::<f64>(&raster).map_err(|e| e.to_string())?;
        let recs = scan_profile(&raster, &axis);
        let span = reference_span(&raster, &axis).ok_or("centroid outside raster")?;
        let f = to_feature_vector_over(&recs, span, 64, 150.0).map_err(|e| e.to_string())?;
        if !f.is_zero() {
            return Err(format!("raster {case}: nonzero feature vector"));
        }
    }
    Ok("200 mirror-symmetric rasters give the zero vector".into())
}

fn smo_correctness() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0f64;
    for case in 0..200 {
        let n = rng.gen_range(2..=6);
        let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect();
        let mut pos: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        pos[0] = true;
        pos[1] = false;
        let c = rng.gen_range(0.1..10.0);
        let gamma = rng.gen_range(0.1..3.0);
        let rows: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let params = SvmParams::new(c, gamma);
        let (_, sol) = train_binary(&rows, &pos, &params).map_err(|e| e.to_string())?;
        let k = gram_matrix(&rows, gamma);
        let y: Vec<f64> = pos.iter().map(|&p| if p { 1.0 } else { -1.0 }).collect();
        let (best, _) = brute_force_dual(&k, &y, c);
        worst = worst.max((sol.dual_objective() - best).abs());

        let balance: f64 = sol.alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
        if !sol.converged || balance.abs() > 1e-9 || sol.alpha.iter().any(|&a| !(0.0..=c).contains(&a)) {
            return Err(format!("instance {case}: box or equality constraint violated"));
        }
        // Complementary slackness on the margins, to twice the stopping tolerance.
        let slack = 2.0 * params.tol;
        for i in 0..n {
            let f: f64 = (0..n).map(|j| sol.alpha[j] * y[j] * k[i * n + j]).sum::<f64>() - sol.rho;
            let m = y[i] * f;
            let ok = if sol.alpha[i] <= 0.0 {
                m >= 1.0 - slack
            } else if sol.alpha[i] >= c {
                m <= 1.0 + slack
            } else {
                (m - 1.0).abs() <= slack
            };
            if !ok {
                return Err(format!("instance {case}: KKT margin {m} with alpha {}", sol.alpha[i]));
            }
        }
    }
    let took = within(Duration::from_secs(30), start)?;
    if worst <= 1e-4 {
        Ok(format!("200 instances, max objective gap {worst:.1e}, KKT held, {took:.2?}"))
    } else {
        Err(format!("max objective gap {worst:e}"))
    }
}

fn end_to_end() -> Verdict {
    let start = Instant::now();
    let config = FeatureConfig::default();
    let lines = corpus(100, 10, 0);
    let rows: Vec<(Vec<f64>, String)> = lines
        .iter()
        .map(|l| {
            let a = analyze_line::<f64>(&l.image, &config).expect("synthetic line analyses");
            (a.features.into_vec(), l.class.name().to_string())
        })
        .collect();
    let data = LabeledDataset::new(rows).map_err(|e| e.to_string())?;
    let params = PipelineConfig::default().svm();
    let cm = cross_validate(&data, EvalMode::KFold(10), &params, 0).map_err(|e| e.to_string())?;
    let cr = cm.classification_rate().map_err(|e| e.to_string())?;
    let took = within(Duration::from_secs(300), start)?;
    let rows_ok = cm.percentages().iter().all(|r| (r.iter().sum::<f64>() - 100.0).abs() <= 0.5);

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut labels: Vec<usize> = data.samples().iter().map(|s| s.class).collect();
    for i in (1..labels.len()).rev() {
        labels.swap(i, rng.gen_range(0..=i));
    }
    let permuted = data.with_classes_of(labels).map_err(|e| e.to_string())?;
    let chance = cross_validate(&permuted, EvalMode::KFold(10), &params, 0)
        .and_then(|m| m.classification_rate())
        .map_err(|e| e.to_string())?;
    let detail = format!("{} lines, 10-fold CR {cr:.2}%, permuted CR {chance:.2}%, {took:.1?}", data.len());
    if cr >= 90.0 && rows_ok && (10.0..=30.0).contains(&chance) {
        Ok(detail)
    } else {
        Err(format!("{detail}, rows sum to 100: {rows_ok}"))
    }
}

fn table_arithmetic() -> Verdict {
    let rows = [
        [79, 14, 0, 4, 3],
        [15, 73, 4, 6, 2],
        [3, 7, 82, 3, 5],
        [7, 13, 3, 66, 11],
        [6, 10, 7, 2, 75],
    ];
    let classes = ["Bangladesh", "India", "China", "Iran", "Malaysia"].map(String::from).to_vec();
    let cm = ConfusionMatrix::from_counts(classes, rows.iter().map(|r| r.to_vec()).collect()).map_err(|e| e.to_string())?;
    let cr = cm.classification_rate().map_err(|e| e.to_string())?;
    if (cr - 75.0).abs() <= 0.1 {
        Ok(format!("CR {cr:.2}%"))
    } else {
        Err(format!("CR {cr}"))
    }
}

fn preprocessing() -> Verdict {
    let params = PreprocessParams::default();
    let (mut worst_rule, mut worst_text) = (100f64, 0f64);
    for seed in 0..20u64 {
        let page = synth_page(&PageLayout::default(), seed).map_err(|e| e.to_string())?;
        let out = preprocess_page(&page.image, &params).map_err(|e| e.to_string())?;
        let cleaned = out.composite();
        let (mut rules, mut rules_gone, mut text, mut text_gone) = (0usize, 0usize, 0usize, 0usize);
        for (i, (&t, &r)) in page.text_mask.iter().zip(&page.rule_mask).enumerate() {
            let gone = cleaned.data()[i] == 255;
            if r && !t {
                rules += 1;
                rules_gone += usize::from(gone);
            }
            if t && !r {
                text += 1;
                text_gone += usize::from(gone);
            }
        }
        worst_rule = worst_rule.min(100.0 * rules_gone as f64 / rules.max(1) as f64);
        worst_text = worst_text.max(100.0 * text_gone as f64 / text.max(1) as f64);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut counts = Vec::new();
    for _ in 0..20 {
        let layout = PageLayout {
            width: rng.gen_range(480..=960),
            ruled: rng.gen(),
            ..PageLayout::default()
        };
        let page = synth_page(&layout, rng.gen()).map_err(|e| e.to_string())?;
        counts.push(preprocess_page(&page.image, &params).map_err(|e| e.to_string())?.lines.len());
    }
    let detail = format!(
        "20 ruled pages: worst rule removal {worst_rule:.2}%, worst text loss {worst_text:.2}%; line counts {counts:?}"
    );
    if worst_rule >= 95.0 && worst_text <= 2.0 && counts.iter().all(|&c| c == 3) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    let cfg = PipelineConfig::default();
    cmd_synth(root, 20, 4, 0, false, 9).map_err(|e| e.to_string())?;
    cmd_extract(&root.join("lines.csv"), &root.join("features.csv"), None, &cfg).map_err(|e| e.to_string())?;
    let run = |n: usize| -> Result<(String, Vec<u8>), String> {
        let model = root.join(format!("model{n}.json"));
        let (report, _) =
            cmd_train(&root.join("features.csv"), &model, None, None, &cfg).map_err(|e| e.to_string())?;
        Ok((report.text, fs::read(Path::new(&model)).map_err(|e| e.to_string())?))
    };
    let (first, second) = (run(1)?, run(2)?);
    let data = cold_cli::commands::read_features(&root.join("features.csv")).map_err(|e| e.to_string())?;
    let cv = |seed| cross_validate(&data, EvalMode::KFold(10), &cfg.svm(), seed).map_err(|e| e.to_string());
    let (a, b) = (cv(3)?, cv(3)?);
    if first == second && a == b && a.render_table() == b.render_table() {
        Ok(format!("{} rows: reports, models and confusion matrices bit-identical", data.len()))
    } else {
        Err("two runs differ".into())
    }
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 geometry oracle", geometry_oracle),
        ("2 RDP equivalence", rdp_equivalence),
        ("3 invariance", invariance),
        ("4 symmetry null", symmetry_null),
        ("5 SMO correctness", smo_correctness),
        ("6 end-to-end CR", end_to_end),
        ("7 confusion-table arithmetic", table_arithmetic),
        ("8 preprocessing", preprocessing),
        ("9 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
