mod common;

use common::*;
use grasspod::harness::{
    cross_validate, evaluate_split, kfold, records_csv, read_records_csv, relative_error, split_mod3, summarize, Dataset,
    ErrorStats, ExperimentConfig, Method,
};
use grasspod::{compute_pod, ReferencePolicy, SnapshotMatrix, TrainConfig};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Snapshots whose column space drifts smoothly with the two parameters.
fn synthetic_cases(n: usize) -> Vec<SnapshotMatrix<f64>> {
    let rows = 40;
    (0..n)
        .map(|k| {
            let a = 1.0 + (k % 5) as f64 * 0.2;
            let b = 0.5 + (k / 5) as f64 * 0.1;
            let d = DMatrix::from_fn(rows, 12, |i, j| {
                let x = i as f64 / rows as f64;
                let t = j as f64 / 12.0;
                (a * std::f64::consts::PI * x).sin() * (1.0 + t)
                    + b * (2.0 * std::f64::consts::PI * x + t).cos() * t
                    + 0.05 * (a * b * x * 7.0).sin() * (3.0 * t).cos()
            });
            SnapshotMatrix::new(d, vec![a, b], format!("case{k}")).unwrap()
        })
        .collect()
}

fn config(rank: usize) -> ExperimentConfig {
    ExperimentConfig {
        rank,
        train: TrainConfig::burgers(),
        reference: ReferencePolicy::MinimaxCenter,
    }
}

proptest! {
    #[test]
    fn kfold_partitions(n in 6usize..=50, k in 2usize..=6, seed in any::<u64>()) {
        let folds = kfold(n, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut seen = vec![0usize; n];
        for (train, test) in &folds {
            prop_assert_eq!(train.len() + test.len(), n);
            prop_assert!(test.len() == n / k || test.len() == n / k + 1);
            for &i in test {
                seen[i] += 1;
                prop_assert!(!train.contains(&i));
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn relative_error_is_pythagorean(seed in any::<u64>(), r in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = SnapshotMatrix::new(gaussian_matrix(10, 7, &mut rng), vec![], "x").unwrap();
        let basis = random_basis(10, r, &mut rng);
        let e = relative_error(&d, &basis).unwrap();
        let captured = (basis.matrix().transpose() * d.data()).norm_squared() / d.data().norm_squared();
        prop_assert!((e - (1.0 - captured).sqrt()).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&e));
    }

    #[test]
    fn stats_are_ordered(errors in proptest::collection::vec(0.0f64..1.0, 1..40)) {
        let s = ErrorStats::from_errors(&errors).unwrap();
        prop_assert!(s.is_ordered());
        prop_assert_eq!(s.count, errors.len());
    }
}

#[test]
fn split_examples() {
    assert_eq!(split_mod3(6), (vec![0, 3], vec![1, 2, 4, 5]));
    assert_eq!(split_mod3(1), (vec![0], vec![]));
    let (train, test) = split_mod3(42);
    assert_eq!((train.len(), test.len()), (14, 28));
    let loo = kfold(5, 5, 0).unwrap();
    assert!(loo.iter().all(|(_, te)| te.len() == 1));
    assert!(kfold(10, 5, 3).unwrap().iter().all(|(_, te)| te.len() == 2));
}

#[test]
fn relative_error_extremes() {
    let d = SnapshotMatrix::new(DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]), vec![], "x").unwrap();
    let inside = grasspod::PodBasis::new(DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0])).unwrap();
    let outside = grasspod::PodBasis::new(DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 0.0])).unwrap();
    assert_eq!(relative_error(&d, &inside).unwrap(), 0.0);
    assert_eq!(relative_error(&d, &outside).unwrap(), 1.0);
}

#[test]
fn oracle_error_is_the_truncation_floor() {
    let cases = synthetic_cases(10);
    let data = Dataset::new(cases.clone(), 2).unwrap();
    let test: Vec<usize> = (0..10).collect();
    let records = evaluate_split(&data, &[], &test, &config(2), &[Method::Oracle], 0).unwrap();
    for r in &records {
        let pod = compute_pod(&cases[r.index], 2).unwrap();
        let s = &pod.singular_values;
        let total: f64 = s.iter().map(|x| x * x).sum();
        let tail: f64 = s.iter().skip(2).map(|x| x * x).sum();
        assert!((r.error.unwrap() - (tail / total).sqrt()).abs() < 1e-12);
    }
}

#[test]
fn no_method_beats_the_floor() {
    let data = Dataset::new(synthetic_cases(20), 3).unwrap();
    let records = cross_validate(&data, 5, 7, &config(3), &[Method::Cxgb, Method::Interp, Method::Oracle]).unwrap();
    assert_eq!(records.len(), 60);
    for r in &records {
        assert!(r.error.unwrap() >= r.floor - 1e-9, "{r:?}");
    }
}

#[test]
fn single_case_statistics_collapse() {
    let data = Dataset::new(synthetic_cases(6), 2).unwrap();
    let records = evaluate_split(&data, &[0, 1, 2, 3, 4], &[5], &config(2), &[Method::Cxgb], 0).unwrap();
    let s = summarize(&records)[&Method::Cxgb].stats.unwrap();
    assert_eq!(s.count, 1);
    assert!(s.mean == s.median && s.min == s.max && s.mean == s.max);
    assert_eq!(s.std, 0.0);
}

#[test]
fn fit_to_one_reaches_the_floor() {
    let data = Dataset::new(synthetic_cases(3), 2).unwrap();
    let records = evaluate_split(&data, &[1], &[1], &config(2), &[Method::Cxgb], 0).unwrap();
    assert!((records[0].error.unwrap() - records[0].floor).abs() < 1e-3);
}

#[test]
fn reports_round_trip_and_repeat() {
    let data = Dataset::new(synthetic_cases(15), 2).unwrap();
    let methods = [Method::Cxgb, Method::Interp];
    let a = cross_validate(&data, 5, 1, &config(2), &methods).unwrap();
    let b = cross_validate(&data, 5, 1, &config(2), &methods).unwrap();
    let csv = records_csv("synthetic", &a).unwrap();
    assert_eq!(csv, records_csv("synthetic", &b).unwrap());
    let (problem, back) = read_records_csv(&csv).unwrap();
    assert_eq!(problem.as_deref(), Some("synthetic"));
    assert_eq!(back, a);
}
