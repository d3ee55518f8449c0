use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use topoband::learn::{
    correlation_matrix, cross_validate, impurity_importance, mutual_information, rank_aggregate, stratified_kfold,
    FeatureMatrix, GaussianNb, GbCriterion, GbParams, GnbParams, GradientBoosting, ModelSpec, Provenance, RfCriterion,
    RfParams,
};
use topoband::Error;

fn labels_90_30_30_30() -> Vec<usize> {
    let mut y = vec![0; 90];
    y.extend([1; 30]);
    y.extend([2; 30]);
    y.extend([3; 30]);
    y
}

/// Four Gaussian blobs with unit spread; centers sit on scaled unit axes so
/// every pair is 10 apart.
fn blobs(per_class: usize, dims: usize, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for c in 0..4 {
        for _ in 0..per_class {
            rows.push(
                (0..dims)
                    .map(|d| if d == c { 10.0 / 2f64.sqrt() } else { 0.0 } + normal.sample(&mut rng))
                    .collect(),
            );
            y.push(c);
        }
    }
    FeatureMatrix::from_rows(rows, y).unwrap()
}

fn noise_matrix(n: usize, p: usize, y: Vec<usize>, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let rows = (0..n)
        .map(|_| (0..p).map(|_| normal.sample(&mut rng)).collect())
        .collect();
    FeatureMatrix::from_rows(rows, y).unwrap()
}

fn small_rf() -> ModelSpec {
    ModelSpec::RandomForest(RfParams {
        max_depth: 6,
        n_estimators: 30,
        criterion: RfCriterion::Gini,
        max_features: 0.5,
    })
}

fn small_gb() -> ModelSpec {
    ModelSpec::GradientBoosting(GbParams {
        n_estimators: 20,
        ..GbParams::default()
    })
}

fn all_rows(data: &FeatureMatrix) -> Vec<usize> {
    (0..data.n_samples()).collect()
}

#[test]
fn folds_of_the_reference_split_are_exact() {
    let y = labels_90_30_30_30();
    let folds = stratified_kfold(&y, 5, 3).unwrap();
    for f in 0..5 {
        let mut counts = [0; 4];
        for (i, _) in folds.iter().enumerate().filter(|(_, &g)| g == f) {
            counts[y[i]] += 1;
        }
        assert_eq!(counts, [18, 6, 6, 6]);
    }
    assert_eq!(folds, stratified_kfold(&y, 5, 3).unwrap());
    let single = stratified_kfold(&[0; 10], 5, 0).unwrap();
    for f in 0..5 {
        assert_eq!(single.iter().filter(|&&g| g == f).count(), 2);
    }
}

#[test]
fn too_small_class_is_rejected() {
    let y = [0, 0, 0, 0, 0, 1, 1, 1];
    assert!(matches!(
        stratified_kfold(&y, 5, 0),
        Err(Error::ClassTooSmall {
            class: 1,
            count: 3,
            folds: 5
        })
    ));
}

proptest! {
    #[test]
    fn folds_are_balanced_per_class(counts in prop::collection::vec(5usize..40, 1..5), k in 2usize..6, seed in any::<u64>()) {
        let y: Vec<usize> = counts.iter().enumerate().flat_map(|(c, &n)| std::iter::repeat_n(c, n)).collect();
        let folds = stratified_kfold(&y, k, seed).unwrap();
        for (c, &n) in counts.iter().enumerate() {
            for f in 0..k {
                let in_fold = (0..y.len()).filter(|&i| y[i] == c && folds[i] == f).count() as f64;
                prop_assert!((in_fold - n as f64 / k as f64).abs() < 1.0);
            }
        }
    }
}

#[test]
fn gnb_simple_cases() {
    let data = FeatureMatrix::from_rows(vec![vec![-5.0], vec![-4.0], vec![4.0], vec![5.0]], vec![0, 0, 1, 1]).unwrap();
    let m = GaussianNb::fit(&data, &all_rows(&data), &GnbParams::default()).unwrap();
    assert_eq!(m.predict_row(&[4.5]), 1);
    // symmetric classes, equal priors: midpoint is an exact tie
    assert_eq!(m.predict_row(&[0.0]), 0);
}

#[test]
fn gnb_matches_hand_computed_posterior() {
    let data = FeatureMatrix::from_rows(vec![vec![0.0], vec![2.0], vec![10.0], vec![14.0]], vec![0, 0, 1, 1]).unwrap();
    let smoothing = 0.01;
    let m = GaussianNb::fit(
        &data,
        &all_rows(&data),
        &GnbParams {
            var_smoothing: smoothing,
        },
    )
    .unwrap();
    // overall variance: mean 6.5, squared deviations 42.25 + 20.25 + 12.25 + 56.25
    let eps = smoothing * 131.0 / 4.0;
    let (v0, v1) = (1.0 + eps, 4.0 + eps);
    let x = 3.0;
    let log_n = |m: f64, v: f64| -0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x - m) * (x - m) / (2.0 * v);
    let expected = [0.5f64.ln() + log_n(1.0, v0), 0.5f64.ln() + log_n(12.0, v1)];
    let got = m.log_posterior(&[x]);
    for (a, b) in got.iter().zip(expected) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn gnb_degenerate_variance() {
    let data = FeatureMatrix::from_rows(vec![vec![1.0], vec![1.0], vec![3.0], vec![3.0]], vec![0, 0, 1, 1]).unwrap();
    assert!(GaussianNb::fit(&data, &all_rows(&data), &GnbParams { var_smoothing: 0.0 }).is_err());
    let m = GaussianNb::fit(&data, &all_rows(&data), &GnbParams::default()).unwrap();
    assert_eq!(m.predict_row(&[2.9]), 1);
    let constant = FeatureMatrix::from_rows(
        vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 5.0], vec![1.0, 6.0]],
        vec![0, 0, 1, 1],
    )
    .unwrap();
    assert!(matches!(
        GaussianNb::fit(&constant, &all_rows(&constant), &GnbParams { var_smoothing: 0.0 }),
        Err(Error::DegenerateVariance { feature: 0 })
    ));
}

#[test]
fn separable_blobs_are_classified_perfectly() {
    let data = blobs(20, 4, 11);
    for spec in [small_rf(), small_gb(), ModelSpec::GaussianNb(GnbParams::default())] {
        let r = cross_validate(&spec, &data, 5, 1).unwrap();
        assert_eq!(r.mean, 1.0, "{}", spec.name());
        assert_eq!(r.std, 0.0);
        assert_eq!(r.fold_accuracies.len(), 5);
    }
}

#[test]
fn shuffled_labels_give_chance_accuracy() {
    let mut means = Vec::new();
    for seed in 0..10 {
        let data = blobs(20, 4, 100 + seed);
        let mut y = data.labels().to_vec();
        y.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled = data.with_labels(y).unwrap();
        means.push(cross_validate(&small_rf(), &shuffled, 5, seed).unwrap().mean);
    }
    let avg = means.iter().sum::<f64>() / means.len() as f64;
    assert!((avg - 0.30).abs() <= 0.15, "{avg}");
}

#[test]
fn stump_cannot_fit_xor() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = Uniform::new(-1.0, 1.0).unwrap();
    let rows: Vec<Vec<f64>> = (0..400).map(|_| vec![u.sample(&mut rng), u.sample(&mut rng)]).collect();
    let y = rows.iter().map(|r| usize::from((r[0] > 0.0) != (r[1] > 0.0))).collect();
    let data = FeatureMatrix::from_rows(rows, y).unwrap();
    let stump = ModelSpec::RandomForest(RfParams {
        max_depth: 1,
        n_estimators: 1,
        criterion: RfCriterion::Gini,
        max_features: 1.0,
    });
    let r = cross_validate(&stump, &data, 5, 0).unwrap();
    assert!(r.mean <= 0.75, "{}", r.mean);
    let deep = ModelSpec::RandomForest(RfParams {
        max_depth: 6,
        n_estimators: 30,
        criterion: RfCriterion::Entropy,
        max_features: 1.0,
    });
    assert!(cross_validate(&deep, &data, 5, 0).unwrap().mean > 0.9);
}

#[test]
fn gb_without_stages_predicts_majority() {
    let data = noise_matrix(180, 3, labels_90_30_30_30(), 2);
    let m = GradientBoosting::fit(
        &data,
        &all_rows(&data),
        &GbParams {
            n_estimators: 0,
            ..GbParams::default()
        },
        0,
    )
    .unwrap();
    assert!((0..180).all(|i| m.predict_row(data.row(i)) == 0));
}

#[test]
fn gb_training_loss_never_increases() {
    let data = blobs(15, 3, 8);
    let mut y = data.labels().to_vec();
    y.swap(0, 20);
    y.swap(5, 50);
    let data = data.with_labels(y).unwrap();
    for criterion in [GbCriterion::Mse, GbCriterion::FriedmanMse] {
        let p = GbParams {
            n_estimators: 40,
            criterion,
            ..GbParams::default()
        };
        let m = GradientBoosting::fit(&data, &all_rows(&data), &p, 0).unwrap();
        let loss = m.train_loss();
        assert_eq!(loss.len(), 41);
        assert!(loss.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{loss:?}");
        assert!(loss[40] < 0.5 * loss[0]);
    }
}

fn planted(seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let y: Vec<usize> = (0..160).map(|i| i % 4).collect();
    let rows = y
        .iter()
        .map(|&c| {
            (0..20)
                .map(|f| if f == 3 { 5.0 * c as f64 } else { 0.0 } + normal.sample(&mut rng))
                .collect()
        })
        .collect();
    FeatureMatrix::from_rows(rows, y).unwrap()
}

#[test]
fn planted_feature_dominates_importance() {
    let data = planted(4);
    let rf = ModelSpec::RandomForest(RfParams {
        max_features: 1.0,
        ..RfParams::default()
    });
    for spec in [rf, small_gb()] {
        let m = spec.fit(&data, &all_rows(&data), 9).unwrap();
        let imp = impurity_importance(&m).unwrap();
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(imp.iter().all(|&v| v >= 0.0));
        assert!(imp[3] > 0.8, "{} {:?}", spec.name(), imp);
    }
    let gnb = ModelSpec::GaussianNb(GnbParams::default())
        .fit(&data, &all_rows(&data), 0)
        .unwrap();
    assert!(matches!(impurity_importance(&gnb), Err(Error::NotTreeBased)));
}

#[test]
fn noise_features_share_importance_evenly() {
    let p = 10;
    let mut mean = vec![0.0; p];
    for seed in 0..5 {
        let data = noise_matrix(120, p, (0..120).map(|i| i % 4).collect(), seed);
        let m = small_rf().fit(&data, &all_rows(&data), seed).unwrap();
        for (a, b) in mean.iter_mut().zip(impurity_importance(&m).unwrap()) {
            *a += b / 5.0;
        }
    }
    assert!(mean.iter().all(|&v| v < 2.0 / p as f64), "{mean:?}");
}

#[test]
fn unused_feature_gets_zero_importance() {
    let mut data_rows: Vec<Vec<f64>> = Vec::new();
    for i in 0..40 {
        data_rows.push(vec![i as f64, 1.0]);
    }
    let data = FeatureMatrix::from_rows(data_rows, (0..40).map(|i| usize::from(i >= 20)).collect()).unwrap();
    let m = small_gb().fit(&data, &all_rows(&data), 0).unwrap();
    assert_eq!(impurity_importance(&m).unwrap()[1], 0.0);
}

#[test]
fn cube_transform_leaves_tree_accuracy_unchanged() {
    let data = planted(12).map_values(|v| v * 0.3);
    let cubed = data.map_values(|v| v * v * v);
    for spec in [small_rf(), small_gb()] {
        let a = cross_validate(&spec, &data, 5, 4).unwrap();
        let b = cross_validate(&spec, &cubed, 5, 4).unwrap();
        assert_eq!(a.fold_accuracies, b.fold_accuracies, "{}", spec.name());
    }
}

#[test]
fn column_order_does_not_change_predictions() {
    let data = planted(13);
    let mut order: Vec<usize> = (0..data.n_features()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    let permuted = data.select_columns(&order);
    for spec in [small_rf(), small_gb()] {
        let a = spec.fit(&data, &all_rows(&data), 21).unwrap();
        let b = spec.fit(&permuted, &all_rows(&data), 21).unwrap();
        let queries = noise_matrix(50, data.n_features(), vec![0; 50], 77);
        for i in 0..50 {
            let q = queries.row(i);
            let qp: Vec<f64> = order.iter().map(|&f| q[f]).collect();
            assert_eq!(a.predict_row(q), b.predict_row(&qp));
        }
    }
}

#[test]
fn relabeling_classes_permutes_predictions() {
    let data = blobs(20, 4, 31);
    let perm = [2, 0, 3, 1];
    let relabeled = data
        .with_labels(data.labels().iter().map(|&c| perm[c]).collect())
        .unwrap();
    let queries = blobs(5, 4, 32);
    for spec in [small_rf(), small_gb(), ModelSpec::GaussianNb(GnbParams::default())] {
        let a = spec.fit(&data, &all_rows(&data), 3).unwrap();
        let b = spec.fit(&relabeled, &all_rows(&data), 3).unwrap();
        for i in 0..queries.n_samples() {
            assert_eq!(
                perm[a.predict_row(queries.row(i))],
                b.predict_row(queries.row(i)),
                "{}",
                spec.name()
            );
        }
    }
}

#[test]
fn cross_validation_is_reproducible() {
    let data = planted(14);
    let a = cross_validate(&small_rf(), &data, 5, 8).unwrap();
    let b = cross_validate(&small_rf(), &data, 5, 8).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
    let single = FeatureMatrix::from_rows((0..10).map(|i| vec![i as f64]).collect(), vec![0; 10]).unwrap();
    assert_eq!(cross_validate(&small_rf(), &single, 5, 0).unwrap().mean, 1.0);
}

#[test]
fn rank_aggregation_fixtures() {
    // four variants, features 16/14/4 and a filler 7
    let ids = vec![16, 14, 4, 7, 2, 3, 5];
    let runs: Vec<(String, Vec<usize>, Vec<f64>)> = [
        [0.30, 0.20, 0.01, 0.10, 0.05, 0.04, 0.03],
        [0.20, 0.30, 0.15, 0.02, 0.01, 0.005, 0.001],
        [0.20, 0.30, 0.15, 0.02, 0.01, 0.005, 0.001],
        [0.30, 0.20, 0.15, 0.02, 0.01, 0.005, 0.001],
    ]
    .iter()
    .enumerate()
    .map(|(v, imp)| (format!("V{}", v + 1), ids.clone(), imp.to_vec()))
    .collect();
    let table = rank_aggregate(&runs).unwrap();
    let row = |id: usize| table.rows.iter().find(|r| r.feature_id == id).unwrap();
    assert_eq!(row(16).rank, vec![1, 2, 2, 1]);
    assert_eq!(row(16).avg_rank, 1.5);
    assert_eq!(row(4).rank, vec![7, 3, 3, 3]);
    assert!(table.rows.windows(2).all(|w| w[0].avg_rank <= w[1].avg_rank));

    let fixture: Vec<(String, Vec<usize>, Vec<f64>)> = [[0.1, 0.9, 0.8, 0.7, 0.6, 0.5], [0.7, 0.9, 0.8, 0.1, 0.1, 0.1]]
        .iter()
        .map(|imp| (String::new(), (0..6).collect(), imp.to_vec()))
        .collect();
    let t = rank_aggregate(&fixture).unwrap();
    let f0 = t.rows.iter().find(|r| r.feature_id == 0).unwrap();
    assert_eq!(f0.rank, vec![6, 3]);

    let all_first = vec![(String::new(), vec![1, 2], vec![0.9, 0.1]); 4];
    assert_eq!(rank_aggregate(&all_first).unwrap().rows[0].avg_rank, 1.0);

    let six_three: Vec<(String, Vec<usize>, Vec<f64>)> = [
        [0.1, 0.9, 0.8, 0.7, 0.6, 0.5],
        [0.7, 0.9, 0.8, 0.1, 0.1, 0.1],
        [0.7, 0.9, 0.8, 0.1, 0.1, 0.1],
        [0.7, 0.9, 0.8, 0.1, 0.1, 0.1],
    ]
    .iter()
    .map(|imp| (String::new(), (0..6).collect(), imp.to_vec()))
    .collect();
    let t = rank_aggregate(&six_three).unwrap();
    assert_eq!(t.rows.iter().find(|r| r.feature_id == 0).unwrap().avg_rank, 3.75);

    let bad = vec![
        (String::new(), vec![1, 2], vec![0.5, 0.5]),
        (String::new(), vec![1, 3], vec![0.5, 0.5]),
    ];
    assert!(matches!(rank_aggregate(&bad), Err(Error::MismatchedFeatureSets)));
}

#[test]
fn mutual_information_of_label_copy_is_class_entropy() {
    let y = labels_90_30_30_30();
    let x: Vec<f64> = y.iter().map(|&c| c as f64).collect();
    let entropy: f64 = [0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]
        .iter()
        .map(|p: &f64| -p * p.ln())
        .sum();
    // closed form: 0.5 ln 2 + 0.5 ln 6
    assert!((entropy - 1.242453).abs() < 1e-6);
    let mi = mutual_information(&x, &y);
    assert!((mi - entropy).abs() < 1e-12, "{mi}");
    assert!((mi - 1.2555).abs() <= 0.05 * 1.2555);
}

#[test]
fn mutual_information_of_independent_noise_is_small() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let x: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
    let y: Vec<usize> = (0..10_000).map(|i| (i * 7 + i / 3) % 4).collect();
    assert!(mutual_information(&x, &y) < 0.05);
    assert_eq!(mutual_information(&vec![2.0; 100], &y[..100]), 0.0);
}

#[test]
fn correlation_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let a: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
    let b: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
    let neg: Vec<f64> = a.iter().map(|v| -v).collect();
    let m = correlation_matrix(&[a.clone(), b, neg, vec![1.0; 10_000]]);
    assert_eq!(m[0][0], 1.0);
    assert!(m[0][1].abs() < 0.05);
    assert!((m[0][2] + 1.0).abs() < 1e-12);
    assert_eq!(m[3][0], 0.0);
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(m[i][j], m[j][i]);
        }
    }
}

#[test]
fn provenance_selection_keeps_ids() {
    let rows = vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]];
    let data = FeatureMatrix::new(
        rows,
        vec![0, 1],
        vec![0, 18, 19],
        vec![Provenance::Tda, Provenance::Pb, Provenance::Pb],
    )
    .unwrap();
    let pb = data.select_provenance(&[Provenance::Pb]);
    assert_eq!(pb.feature_ids(), &[18, 19]);
    assert_eq!(pb.row(1), &[5.0, 6.0]);
}
