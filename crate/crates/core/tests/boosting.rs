mod common;

use common::*;
use grasspod::cxgboost::{fit, solve_leaf_qcqp, EmbeddedDataset, LeafProblem, TrainConfig};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

fn dataset(thetas: Vec<Vec<f64>>, ys: Vec<Vec<f64>>) -> EmbeddedDataset<f64> {
    EmbeddedDataset::new(thetas, ys.into_iter().map(DVector::from_vec).collect()).unwrap()
}

fn leaf(g: [f64; 2], curvature: f64, centers: &[DVector<f64>]) -> LeafProblem<'_, f64> {
    LeafProblem {
        grad_sum: DVector::from_vec(g.to_vec()),
        hess_scale: curvature,
        l2: 0.0,
        centers: centers.iter().collect(),
    }
}

#[test]
fn single_constraint_lands_on_the_boundary() {
    let centers = vec![DVector::zeros(2)];
    let p = leaf([-10.0, 0.0], 1.0, &centers);
    let w = solve_leaf_qcqp(&p, FRAC_PI_2).unwrap();
    assert!((w[0] - FRAC_PI_2).abs() < 1e-8 && w[1].abs() < 1e-8, "{w}");
    let (best, _) = grid_search_2d([-10.0, 0.0], 1.0, &[[0.0, 0.0]], FRAC_PI_2, 1e-3).unwrap();
    assert!(p.objective(&w) <= best + 1e-6);
}

#[test]
fn lens_intersection_matches_grid_search() {
    let centers = vec![DVector::from_vec(vec![1.2, 0.0]), DVector::from_vec(vec![-1.2, 0.0])];
    let p = leaf([0.0, -3.0], 2.0, &centers);
    let w = solve_leaf_qcqp(&p, FRAC_PI_2).unwrap();
    assert!(p.max_violation(&w, FRAC_PI_2) < 1e-9);
    let (best, at) = grid_search_2d([0.0, -3.0], 2.0, &[[1.2, 0.0], [-1.2, 0.0]], FRAC_PI_2, 1e-3).unwrap();
    assert!(p.objective(&w) <= best + 1e-6);
    assert!((w[0] - at[0]).abs() < 1e-2 && (w[1] - at[1]).abs() < 1e-2);
    let top = (FRAC_PI_2.powi(2) - 1.2f64.powi(2)).sqrt();
    assert!(w[0].abs() < 1e-8 && (w[1] - top).abs() < 1e-8, "{w}");
}

#[test]
fn kkt_residual_on_random_leaves() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let dim = 1 + (uniform(&mut rng, 0.0, 5.0) as usize);
        let centers: Vec<DVector<f64>> = (0..1 + (uniform(&mut rng, 0.0, 4.0) as usize))
            .map(|_| {
                let v = DVector::from_fn(dim, |_, _| uniform(&mut rng, -1.0, 1.0));
                let n = v.norm();
                v * (uniform(&mut rng, 0.0, 1.5) / n)
            })
            .collect();
        let p = LeafProblem {
            grad_sum: DVector::from_fn(dim, |_, _| uniform(&mut rng, -8.0, 8.0)),
            hess_scale: uniform(&mut rng, 1.0, 5.0),
            l2: 0.01,
            centers: centers.iter().collect(),
        };
        let w = solve_leaf_qcqp(&p, FRAC_PI_2).unwrap();
        assert!(p.max_violation(&w, FRAC_PI_2) < 1e-9);
        // stationarity with multipliers fitted by non-negative least squares on the active set
        let grad = &p.grad_sum + &w * p.curvature();
        let active: Vec<DVector<f64>> = centers
            .iter()
            .filter(|c| ((&w + *c).norm() - FRAC_PI_2).abs() < 1e-7)
            .map(|c| &w + c)
            .collect();
        if active.is_empty() {
            assert!(grad.norm() < 1e-8);
            continue;
        }
        // any descent direction feasible for every active constraint must not decrease the objective
        for _ in 0..200 {
            let d = DVector::from_fn(dim, |_, _| uniform(&mut rng, -1.0, 1.0));
            if active.iter().all(|a| a.dot(&d) <= 0.0) {
                assert!(grad.dot(&d) >= -1e-7 * d.norm() * grad.norm().max(1.0));
            }
        }
    }
}

#[test]
fn two_samples_are_split_apart() {
    let data = dataset(vec![vec![0.0], vec![1.0]], vec![vec![0.4, 0.0], vec![-0.4, 0.0]]);
    let cfg = TrainConfig {
        rounds: 1,
        learning_rate: 1.0,
        max_depth: 1,
        leaf_penalty: 0.0,
        l2_penalty: 0.0,
        ..TrainConfig::default()
    };
    let fitted = fit(&data, &cfg).unwrap();
    assert_eq!(fitted.ensemble.trees[0].n_leaves(), 2);
    assert!((fitted.ensemble.predict(&[0.0])[0] - 0.4).abs() < 1e-12);
    assert!((fitted.ensemble.predict(&[1.0])[0] + 0.4).abs() < 1e-12);
}

#[test]
fn one_sample_is_one_leaf() {
    let data = dataset(vec![vec![3.0]], vec![vec![1.2, 0.0]]);
    let cfg = TrainConfig {
        rounds: 1,
        learning_rate: 1.0,
        l2_penalty: 1.0,
        ..TrainConfig::default()
    };
    let fitted = fit(&data, &cfg).unwrap();
    assert_eq!(fitted.ensemble.trees[0].n_leaves(), 1);
    assert_eq!(fitted.ensemble.predict(&[3.0]).as_slice(), &[0.6, 0.0]);
}

#[test]
fn two_clusters_are_fit_by_stumps() {
    let mut thetas = Vec::new();
    let mut ys = Vec::new();
    for i in 0..20 {
        let t = -1.0 + i as f64 * 0.1;
        thetas.push(vec![t]);
        ys.push(if t < 0.0 { vec![0.5, -0.3, 0.1] } else { vec![-0.4, 0.2, 0.6] });
    }
    let data = dataset(thetas.clone(), ys.clone());
    let cfg = TrainConfig {
        rounds: 50,
        learning_rate: 0.5,
        max_depth: 1,
        leaf_penalty: 0.0,
        ..TrainConfig::default()
    };
    let fitted = fit(&data, &cfg).unwrap();
    let (mut num, mut den) = (0.0, 0.0);
    for (t, y) in thetas.iter().zip(&ys) {
        let y = DVector::from_vec(y.clone());
        num += (fitted.ensemble.predict(t) - &y).norm_squared();
        den += y.norm_squared();
    }
    assert!((num / den).sqrt() < 1e-6);
}

#[test]
fn loss_is_monotone_without_leaf_penalty() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let n = 25;
        let thetas: Vec<Vec<f64>> = (0..n).map(|_| vec![uniform(&mut rng, 0.0, 1.0), uniform(&mut rng, 0.0, 1.0)]).collect();
        let ys: Vec<Vec<f64>> = thetas
            .iter()
            .map(|t| vec![1.2 * (3.0 * t[0]).sin(), 0.9 * t[1] - 0.4, 0.6 * t[0] * t[1]])
            .collect();
        let cfg = TrainConfig {
            rounds: 40,
            leaf_penalty: 0.0,
            ..TrainConfig::default()
        };
        let fitted = fit(&dataset(thetas, ys), &cfg).unwrap();
        for w in fitted.report.loss_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{} > {}", w[1], w[0]);
        }
    }
}

#[test]
fn subsampled_training_stays_in_the_ball() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let thetas: Vec<Vec<f64>> = (0..30).map(|_| vec![uniform(&mut rng, 0.0, 1.0)]).collect();
    let ys: Vec<Vec<f64>> = thetas.iter().map(|t| vec![1.5 * (6.0 * t[0]).cos(), 0.4]).collect();
    let cfg = TrainConfig {
        rounds: 60,
        learning_rate: 0.9,
        subsample: 0.5,
        ..TrainConfig::default()
    };
    let fitted = fit(&dataset(thetas.clone(), ys), &cfg).unwrap();
    assert!(fitted.report.max_prediction_norm <= FRAC_PI_2 + 1e-9);
    for t in &thetas {
        assert!(fitted.ensemble.predict(t).norm() <= FRAC_PI_2 + 1e-9);
    }
}

#[test]
fn training_is_deterministic() {
    let thetas: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, (i % 3) as f64]).collect();
    let ys: Vec<Vec<f64>> = (0..12).map(|i| vec![(i as f64 * 0.3).sin(), 0.1 * i as f64 - 0.5]).collect();
    let data = dataset(thetas, ys);
    let cfg = TrainConfig {
        subsample: 0.7,
        seed: 11,
        ..TrainConfig::default()
    };
    assert_eq!(fit(&data, &cfg).unwrap().ensemble, fit(&data, &cfg).unwrap().ensemble);
}
