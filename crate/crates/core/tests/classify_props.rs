use cold_core::classify::{
    cross_validate, gaussian_kernel, gram_matrix, hyperparameter_search, solve_dual, train_binary, train_multiclass,
    ConfusionMatrix, EvalMode, GridSearch, LabeledDataset, SearchStrategy, SvmParams,
};
use cold_oracles::brute_force_dual;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Up to six labelled points in the plane with both labels present.
fn tiny_problem() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<bool>, f64, f64)> {
    (2usize..=6)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), n),
                prop::collection::vec(any::<bool>(), n),
                0.1f64..10.0,
                0.1f64..3.0,
            )
        })
        .prop_map(|(x, mut pos, c, g)| {
            pos[0] = true;
            pos[1] = false;
            (x, pos, c, g)
        })
}

fn blobs(per_class: usize, classes: usize, spread: f64, dim: usize, seed: u64) -> LabeledDataset<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..classes)
        .flat_map(|c| {
            let centre: Vec<f64> = (0..dim).map(|d| if d % classes == c { 1.0 } else { 0.0 }).collect();
            (0..per_class)
                .map(|_| {
                    let v = centre.iter().map(|m| m + spread * (rng.gen::<f64>() - 0.5)).collect();
                    (v, format!("class{c}"))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    LabeledDataset::new(rows).unwrap()
}

fn labels(x: &[bool]) -> Vec<f64> {
    x.iter().map(|&p| if p { 1.0 } else { -1.0 }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn kernel_is_symmetric_and_bounded(
        x in prop::collection::vec(-5.0f64..5.0, 1..20),
        shift in prop::collection::vec(-5.0f64..5.0, 20),
        gamma in 1e-3f64..10.0,
    ) {
        let z: Vec<f64> = x.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let kxz = gaussian_kernel(&x, &z, gamma).unwrap();
        prop_assert_eq!(kxz, gaussian_kernel(&z, &x, gamma).unwrap());
        prop_assert!((0.0..=1.0).contains(&kxz));
        prop_assert_eq!(gaussian_kernel(&x, &x, gamma).unwrap(), 1.0);
        prop_assert!(gaussian_kernel(&x, &z[..x.len().saturating_sub(1)], gamma).is_err() || x.is_empty());
    }

    #[test]
    fn smo_matches_brute_force((x, pos, c, gamma) in tiny_problem()) {
        let rows: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let params = SvmParams::new(c, gamma);
        let (_, sol) = train_binary(&rows, &pos, &params).unwrap();
        let (best, _) = brute_force_dual(&gram_matrix(&rows, gamma), &labels(&pos), c);
        prop_assert!((sol.dual_objective() - best).abs() < 1e-4, "smo {} oracle {}", sol.dual_objective(), best);
    }

    #[test]
    fn trained_models_satisfy_kkt(
        x in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 4..40),
        seed in any::<u64>(),
        c in 0.05f64..100.0,
        gamma in 0.01f64..5.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pos: Vec<bool> = (0..x.len()).map(|_| rng.gen()).collect();
        pos[0] = true;
        pos[1] = false;
        let rows: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let (svm, sol) = train_binary(&rows, &pos, &SvmParams::new(c, gamma)).unwrap();
        prop_assert!(sol.alpha.iter().all(|&a| (0.0..=c).contains(&a)));
        let balance: f64 = sol.alpha.iter().zip(labels(&pos)).map(|(a, y)| a * y).sum();
        prop_assert!(balance.abs() < 1e-6, "sum alpha y = {}", balance);
        prop_assert!(svm.coefficients.iter().map(|a| a.abs()).all(|a| a > 0.0 && a <= c));
        for w in sol.objective_trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12, "objective fell {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn feature_scale_and_gamma_cancel_in_the_kernel(seed in any::<u64>(), k in 0.1f64..10.0) {
        let data = blobs(6, 3, 0.8, 4, seed);
        let x: Vec<&[f64]> = data.samples().iter().map(|s| s.features.as_slice()).collect();
        let scaled: Vec<Vec<f64>> = x.iter().map(|r| r.iter().map(|v| v * k).collect()).collect();
        let xs: Vec<&[f64]> = scaled.iter().map(Vec::as_slice).collect();
        for (a, b) in gram_matrix(&x, 0.7).iter().zip(gram_matrix(&xs, 0.7 / (k * k))) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn power_of_two_scaling_keeps_predictions_bit_identical(seed in any::<u64>(), j in -4i32..=4) {
        // Scaling by 2^j is exact, so training sees identical kernel values.
        let k = 2f64.powi(j);
        let data = blobs(6, 3, 0.8, 4, seed);
        let scaled = LabeledDataset::new(
            data.samples()
                .iter()
                .map(|s| (s.features.iter().map(|v| v * k).collect(), data.classes()[s.class].clone()))
                .collect(),
        )
        .unwrap();
        let m = train_multiclass(&data, &SvmParams::new(3.0, 0.7)).unwrap();
        let ms = train_multiclass(&scaled, &SvmParams::new(3.0, 0.7 / (k * k))).unwrap();
        for (s, t) in data.samples().iter().zip(scaled.samples()) {
            let (a, b) = (m.predict(&s.features).unwrap(), ms.predict(&t.features).unwrap());
            prop_assert_eq!(a.class, b.class);
            prop_assert_eq!(a.scores, b.scores);
        }
    }

    #[test]
    fn confusion_rows_sum_to_100(counts in prop::collection::vec(prop::collection::vec(0usize..50, 4), 4)) {
        prop_assume!(counts.iter().all(|r| r.iter().sum::<usize>() > 0));
        let cm = ConfusionMatrix::from_counts((0..4).map(|i| format!("c{i}")).collect(), counts.clone()).unwrap();
        for row in cm.percentages() {
            prop_assert!((row.iter().sum::<f64>() - 100.0).abs() <= 0.5);
        }
        let trace: usize = (0..4).map(|i| counts[i][i]).sum();
        let total: usize = counts.iter().flatten().sum();
        prop_assert_eq!(cm.classification_rate().unwrap(), 100.0 * trace as f64 / total as f64);
    }
}

#[test]
fn xor_is_separated() {
    let x = [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
    let rows: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
    let pos = [true, true, false, false];
    let (svm, _) = train_binary(&rows, &pos, &SvmParams::new(10.0, 1.0)).unwrap();
    for (r, &p) in rows.iter().zip(&pos) {
        assert_eq!(svm.decision(r).unwrap() > 0.0, p);
    }
}

#[test]
fn solve_dual_on_precomputed_kernel() {
    let k = gram_matrix(&[&[0.0][..], &[1.0][..]], 1.0);
    let sol = solve_dual(&k, &[1.0, -1.0], 100.0, 1e-6, 1000);
    let (best, _) = brute_force_dual(&k, &[1.0, -1.0], 100.0);
    assert!(sol.converged && (sol.dual_objective() - best).abs() < 1e-6);
}

#[test]
fn separable_clusters_are_perfect() {
    let data = blobs(20, 5, 0.2, 5, 1);
    let cm = cross_validate(&data, EvalMode::KFold(5), &SvmParams::new(10.0, 1.0), 7).unwrap();
    assert_eq!(cm.classification_rate().unwrap(), 100.0);
    let holdout = cross_validate(&data, EvalMode::Holdout { test_fraction: 0.1 }, &SvmParams::new(10.0, 1.0), 7).unwrap();
    assert_eq!(holdout.total(), 10);
}

#[test]
fn permuted_labels_score_near_chance() {
    let data = blobs(30, 5, 0.3, 5, 2);
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut classes: Vec<usize> = data.samples().iter().map(|s| s.class).collect();
        rand::seq::SliceRandom::shuffle(classes.as_mut_slice(), &mut rng);
        let permuted = data.with_classes_of(classes).unwrap();
        let cr = cross_validate(&permuted, EvalMode::KFold(5), &SvmParams::new(10.0, 1.0), seed)
            .unwrap()
            .classification_rate()
            .unwrap();
        assert!((10.0..=30.0).contains(&cr), "seed {seed}: CR {cr}");
    }
}

#[test]
fn duplicated_samples_predict_the_same() {
    let data = blobs(8, 3, 0.9, 3, 3);
    let doubled = LabeledDataset::new(
        data.samples()
            .iter()
            .flat_map(|s| {
                let row = (s.features.clone(), data.classes()[s.class].clone());
                [row.clone(), row]
            })
            .collect(),
    )
    .unwrap();
    let params = SvmParams::new(5.0, 1.0);
    let a = train_multiclass(&data, &params).unwrap();
    let b = train_multiclass(&doubled, &SvmParams { c: 2.5, ..params }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let probe: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() * 1.6 - 0.3).collect();
        assert_eq!(a.predict(&probe).unwrap().class, b.predict(&probe).unwrap().class, "{probe:?}");
    }
}

#[test]
fn predictions_are_deterministic_and_sign_consistent() {
    let data = blobs(10, 2, 1.2, 2, 4);
    let m = train_multiclass(&data, &SvmParams::new(1.0, 1.0)).unwrap();
    assert_eq!(m.pairs.len(), 1);
    for s in data.samples() {
        let p = m.predict(&s.features).unwrap();
        assert_eq!(p, m.predict(&s.features).unwrap());
        let f = m.pairs[0].svm.decision(&s.features).unwrap();
        let want = if f > 0.0 { m.pairs[0].positive } else { m.pairs[0].negative };
        assert_eq!(p.class, want);
    }
    let five = train_multiclass(&blobs(4, 5, 0.5, 5, 5), &SvmParams::new(1.0, 1.0)).unwrap();
    assert_eq!(five.pairs.len(), 10);
}

#[test]
fn search_budget_and_determinism() {
    let data = blobs(10, 3, 0.2, 3, 6);
    let first = GridSearch::default().propose(&[]).unwrap();
    let one = hyperparameter_search(&data, 1, EvalMode::KFold(3), 0, &mut GridSearch::default()).unwrap();
    assert_eq!(one.history.len(), 1);
    assert_eq!((one.best.c, one.best.gamma), first);
    let a = hyperparameter_search(&data, 25, EvalMode::KFold(3), 0, &mut GridSearch::default()).unwrap();
    let b = hyperparameter_search(&data, 25, EvalMode::KFold(3), 0, &mut GridSearch::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.best.cr, 100.0);
}
