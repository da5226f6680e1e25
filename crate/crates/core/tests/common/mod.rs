#![allow(dead_code)]

use grasspod::cxgboost::{Ensemble, TrainConfig, TreeNode};
use grasspod::PodBasis;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn random_basis(n: usize, r: usize, rng: &mut ChaCha8Rng) -> PodBasis<f64> {
    PodBasis::orthonormalize(gaussian_matrix(n, r, rng)).unwrap()
}

/// Random horizontal lift at `base` (`Phi^T Z = 0`) with Frobenius norm `norm`.
pub fn random_lift(base: &PodBasis<f64>, norm: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let phi = base.matrix();
    let g = gaussian_matrix(phi.nrows(), phi.ncols(), rng);
    let z = &g - phi * (phi.transpose() * &g);
    &z * (norm / z.norm())
}

pub fn random_orthogonal(r: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    gaussian_matrix(r, r, rng).qr().q()
}

/// Brute-force minimum of `G^T w + c/2 |w|^2` over a grid of spacing `step`
/// restricted to `|w + c_i| <= R`.
pub fn grid_search_2d(g: [f64; 2], curvature: f64, centers: &[[f64; 2]], radius: f64, step: f64) -> Option<(f64, [f64; 2])> {
    let steps = (2.0 * radius / step).ceil() as i64;
    let (x0, y0) = (-centers[0][0] - radius, -centers[0][1] - radius);
    let mut best: Option<(f64, [f64; 2])> = None;
    for i in 0..=steps {
        let x = x0 + i as f64 * step;
        for j in 0..=steps {
            let y = y0 + j as f64 * step;
            let feasible = centers
                .iter()
                .all(|c| (x + c[0]).powi(2) + (y + c[1]).powi(2) <= radius * radius);
            if !feasible {
                continue;
            }
            let f = g[0] * x + g[1] * y + 0.5 * curvature * (x * x + y * y);
            if best.is_none_or(|(b, _)| f < b) {
                best = Some((f, [x, y]));
            }
        }
    }
    best
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// Plain boosting with the split structure of `fitted` forced: every leaf
/// weight is recomputed as `-sum(g) / (count + lambda)` from the residuals of
/// this implementation.
pub fn forced_split_boosting(
    fitted: &Ensemble<f64>,
    thetas: &[Vec<f64>],
    targets: &[DVector<f64>],
    cfg: &TrainConfig,
) -> Vec<DVector<f64>> {
    let dim = targets[0].len();
    let mut preds = vec![DVector::<f64>::zeros(dim); thetas.len()];
    for tree in &fitted.trees {
        let leaf_of = |theta: &[f64]| {
            let mut idx = 0;
            loop {
                match &tree.nodes[idx] {
                    TreeNode::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => idx = if theta[*feature] < *threshold { *left } else { *right },
                    TreeNode::Leaf { .. } => return idx,
                }
            }
        };
        let leaves: Vec<usize> = thetas.iter().map(|t| leaf_of(t)).collect();
        let mut sums: std::collections::HashMap<usize, (DVector<f64>, f64)> = Default::default();
        for (i, leaf) in leaves.iter().enumerate() {
            let e = sums.entry(*leaf).or_insert((DVector::zeros(dim), 0.0));
            e.0 += &preds[i] - &targets[i];
            e.1 += 1.0;
        }
        for (i, leaf) in leaves.iter().enumerate() {
            let (g, n) = &sums[leaf];
            let w = -g / (n + cfg.l2_penalty);
            preds[i] += w * cfg.learning_rate;
        }
    }
    preds
}
