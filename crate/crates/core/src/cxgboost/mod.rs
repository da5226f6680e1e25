//! Constrained gradient boosting with vector-valued leaves.
//!
//! Each round fits one tree to the squared-loss gradients. Leaf weights solve
//! a ball-constrained QCQP so that every training prediction stays inside the
//! chart's injectivity ball; with shrinkage `eta` the update
//! `y + eta w = (1 - eta) y + eta (y + w)` is a convex combination of two ball
//! points and therefore stays feasible too.

pub mod qcqp;
pub mod tree;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};
pub use qcqp::{solve_leaf_qcqp, LeafProblem};
pub use tree::{Tree, TreeNode};
use tree::{Grower, RoundData};

/// Boosting hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Number of boosting rounds `K`.
    pub rounds: usize,
    /// Shrinkage `eta` in (0, 1].
    pub learning_rate: f64,
    pub max_depth: usize,
    /// `gamma`, charged per leaf.
    pub leaf_penalty: f64,
    /// `lambda`, the L2 penalty on leaf weights.
    pub l2_penalty: f64,
    /// Fraction of rows drawn (without replacement) per round.
    pub subsample: f64,
    pub min_samples_leaf: usize,
    pub seed: u64,
    /// Disable only to compare against unconstrained boosting.
    pub enforce_ball: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::burgers()
    }
}

impl TrainConfig {
    fn preset(rounds: usize, learning_rate: f64, max_depth: usize, subsample: f64) -> Self {
        Self {
            rounds,
            learning_rate,
            max_depth,
            leaf_penalty: 1e-3,
            l2_penalty: 1e-2,
            subsample,
            min_samples_leaf: 1,
            seed: 0,
            enforce_ball: true,
        }
    }

    pub fn cylinder() -> Self {
        Self::preset(120, 0.2, 2, 0.7)
    }

    pub fn wave() -> Self {
        Self::preset(80, 0.2, 4, 1.0)
    }

    pub fn burgers() -> Self {
        Self::preset(100, 0.35, 3, 1.0)
    }

    pub fn beam() -> Self {
        Self::preset(80, 0.4, 4, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must lie in (0, 1]");
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad("subsample must lie in (0, 1]");
        }
        if !(self.leaf_penalty >= 0.0) || !(self.l2_penalty >= 0.0) {
            return bad("penalties must be non-negative");
        }
        if self.min_samples_leaf == 0 {
            return bad("min_samples_leaf must be at least 1");
        }
        Ok(())
    }
}

/// Training pairs `(theta_i, y_i)` with `|y_i| < pi/2`.
#[derive(Debug, Clone)]
pub struct EmbeddedDataset<T: Real> {
    thetas: Vec<Vec<T>>,
    targets: Vec<DVector<T>>,
}

impl<T: Real> EmbeddedDataset<T> {
    pub fn new(thetas: Vec<Vec<T>>, targets: Vec<DVector<T>>) -> Result<Self> {
        if thetas.is_empty() || thetas.len() != targets.len() {
            return Err(Error::InvalidDataset(format!(
                "{} parameter vectors for {} targets",
                thetas.len(),
                targets.len()
            )));
        }
        let d = thetas[0].len();
        let p = targets[0].len();
        if d == 0 || p == 0 {
            return Err(Error::InvalidDataset("empty feature or target vectors".into()));
        }
        let radius = T::frac_pi_2();
        for (i, (theta, y)) in thetas.iter().zip(&targets).enumerate() {
            if theta.len() != d || y.len() != p {
                return Err(Error::InvalidDataset(format!("sample {i} has inconsistent dimensions")));
            }
            if theta.iter().chain(y.iter()).any(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!("sample {i} has non-finite entries")));
            }
            if !(y.norm() < radius) {
                return Err(Error::InvalidDataset(format!(
                    "sample {i} has |y| = {} outside the open pi/2 ball",
                    to_f64(y.norm())
                )));
            }
        }
        Ok(Self { thetas, targets })
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.thetas[0].len()
    }

    pub fn output_dim(&self) -> usize {
        self.targets[0].len()
    }

    pub fn thetas(&self) -> &[Vec<T>] {
        &self.thetas
    }

    pub fn targets(&self) -> &[DVector<T>] {
        &self.targets
    }
}

/// Additive tree ensemble `y(theta) = sum_k eta f_k(theta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble<T> {
    pub trees: Vec<Tree<T>>,
    pub learning_rate: T,
    pub output_dim: usize,
    pub n_features: usize,
}

impl<T: Real> Ensemble<T> {
    pub fn empty(output_dim: usize, n_features: usize, learning_rate: T) -> Self {
        Self {
            trees: Vec::new(),
            learning_rate,
            output_dim,
            n_features,
        }
    }

    pub fn predict(&self, theta: &[T]) -> DVector<T> {
        let mut y = DVector::zeros(self.output_dim);
        for tree in &self.trees {
            let w = tree.leaf_weight(theta);
            for (yi, wi) in y.iter_mut().zip(w) {
                *yi += self.learning_rate * *wi;
            }
        }
        y
    }
}

/// Gradient of `1/2 |y - y_hat|^2` with respect to `y_hat`, and the scalar
/// Hessian multiplier (the Hessian is the identity).
pub fn squared_loss_gradient<T: Real>(y_true: &DVector<T>, y_pred: &DVector<T>) -> (DVector<T>, T) {
    (y_pred - y_true, T::one())
}

pub fn squared_loss<T: Real>(y_true: &DVector<T>, y_pred: &DVector<T>) -> T {
    (y_true - y_pred).norm_squared() * lit(0.5)
}

#[derive(Debug, Clone)]
pub struct FitReport<T> {
    /// Training loss before the first round and after each round.
    pub loss_history: Vec<T>,
    /// Largest `|y_hat_i|` seen on training inputs over all rounds.
    pub max_prediction_norm: T,
    /// Leaves whose QCQP failed and fell back to `w = 0`.
    pub solver_fallbacks: usize,
}

#[derive(Debug, Clone)]
pub struct Fitted<T: Real> {
    pub ensemble: Ensemble<T>,
    pub report: FitReport<T>,
}

/// Trains the constrained ensemble.
pub fn fit<T: Real>(data: &EmbeddedDataset<T>, cfg: &TrainConfig) -> Result<Fitted<T>> {
    cfg.validate()?;
    let n = data.len();
    let eta: T = lit(cfg.learning_rate);
    let radius = T::frac_pi_2();
    let mut ensemble = Ensemble::empty(data.output_dim(), data.n_features(), eta);
    let mut preds = vec![DVector::<T>::zeros(data.output_dim()); n];
    let total_loss = |preds: &[DVector<T>]| {
        data.targets()
            .iter()
            .zip(preds)
            .fold(T::zero(), |acc, (y, p)| acc + squared_loss(y, p))
    };
    let mut report = FitReport {
        loss_history: vec![total_loss(&preds)],
        max_prediction_norm: T::zero(),
        solver_fallbacks: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bag_size = ((cfg.subsample * n as f64).round() as usize).clamp(1, n);

    for _ in 0..cfg.rounds {
        let grads: Vec<DVector<T>> = data
            .targets()
            .iter()
            .zip(&preds)
            .map(|(y, p)| squared_loss_gradient(y, p).0)
            .collect();
        let mut in_bag = vec![bag_size == n; n];
        if bag_size < n {
            for i in rand::seq::index::sample(&mut rng, n, bag_size) {
                in_bag[i] = true;
            }
        }
        let round = RoundData {
            thetas: data.thetas(),
            grads: &grads,
            preds: &preds,
            in_bag: &in_bag,
            radius,
        };
        let (tree, fallbacks) = Grower::new(round, cfg).grow((0..n).collect());
        report.solver_fallbacks += fallbacks;
        for (p, theta) in preds.iter_mut().zip(data.thetas()) {
            for (pi, wi) in p.iter_mut().zip(tree.leaf_weight(theta)) {
                *pi += eta * *wi;
            }
            let norm = p.norm();
            if norm > report.max_prediction_norm {
                report.max_prediction_norm = norm;
            }
        }
        ensemble.trees.push(tree);
        report.loss_history.push(total_loss(&preds));
    }
    if report.solver_fallbacks > 0 {
        log::warn!("{} leaves fell back to zero weight", report.solver_fallbacks);
    }
    Ok(Fitted { ensemble, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(thetas: Vec<Vec<f64>>, ys: Vec<Vec<f64>>) -> EmbeddedDataset<f64> {
        EmbeddedDataset::new(thetas, ys.into_iter().map(DVector::from_vec).collect()).unwrap()
    }

    #[test]
    fn gradient_examples() {
        let y = DVector::from_vec(vec![1.0, 0.0]);
        let (g, h) = squared_loss_gradient(&y, &y);
        assert_eq!(g, DVector::zeros(2));
        assert_eq!(h, 1.0);
        let (g, _) = squared_loss_gradient(&y, &DVector::zeros(2));
        assert_eq!(g.as_slice(), &[-1.0, 0.0]);
    }

    #[test]
    fn empty_ensemble_predicts_zero() {
        let data = dataset(vec![vec![0.0], vec![1.0]], vec![vec![0.1, 0.2], vec![0.3, 0.0]]);
        let cfg = TrainConfig {
            rounds: 0,
            ..TrainConfig::default()
        };
        let fitted = fit(&data, &cfg).unwrap();
        assert_eq!(fitted.ensemble.predict(&[0.5]), DVector::zeros(2));
    }

    #[test]
    fn single_sample_converges() {
        let data = dataset(vec![vec![0.3, 1.0]], vec![vec![0.8, -0.6, 0.5]]);
        let cfg = TrainConfig {
            rounds: 80,
            learning_rate: 0.2,
            ..TrainConfig::default()
        };
        let fitted = fit(&data, &cfg).unwrap();
        let y = fitted.ensemble.predict(&[5.0, -2.0]);
        assert!((y - &data.targets()[0]).norm() < 1e-4);
        assert!(fitted.ensemble.trees.iter().all(|t| t.n_leaves() == 1));
    }

    #[test]
    fn stump_prediction_is_scaled_leaf() {
        let data = dataset(vec![vec![0.0], vec![1.0]], vec![vec![0.5], vec![-0.5]]);
        let cfg = TrainConfig {
            rounds: 1,
            learning_rate: 0.5,
            max_depth: 1,
            leaf_penalty: 0.0,
            l2_penalty: 0.0,
            ..TrainConfig::default()
        };
        let fitted = fit(&data, &cfg).unwrap();
        let tree = &fitted.ensemble.trees[0];
        assert_eq!(tree.depth(), 1);
        match &tree.nodes[0] {
            TreeNode::Split { threshold, .. } => assert_eq!(*threshold, 0.5),
            _ => panic!("expected split"),
        }
        assert_eq!(fitted.ensemble.predict(&[0.2])[0], 0.5 * 0.5);
        assert_eq!(fitted.ensemble.predict(&[0.9])[0], 0.5 * -0.5);
    }

    #[test]
    fn constant_residuals_do_not_split() {
        let data = dataset(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![vec![0.4], vec![0.4], vec![0.4]],
        );
        let cfg = TrainConfig {
            rounds: 3,
            max_depth: 3,
            ..TrainConfig::default()
        };
        let fitted = fit(&data, &cfg).unwrap();
        assert!(fitted.ensemble.trees.iter().all(|t| t.n_leaves() == 1));
    }

    #[test]
    fn rejects_targets_outside_ball() {
        let err = EmbeddedDataset::new(vec![vec![0.0]], vec![DVector::from_vec(vec![1.6])]).unwrap_err();
        assert!(matches!(err, Error::InvalidDataset(_)));
        assert!(TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn subsampled_training_stays_feasible() {
        let thetas: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * 7 % 5) as f64]).collect();
        let ys: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let a = i as f64 * 0.3;
                vec![1.5 * a.cos(), 1.5 * a.sin() * 0.99]
            })
            .collect();
        let data = dataset(thetas, ys);
        let fitted = fit(&data, &TrainConfig::cylinder()).unwrap();
        assert!(fitted.report.max_prediction_norm <= std::f64::consts::FRAC_PI_2 + 1e-9);
        let again = fit(&data, &TrainConfig::cylinder()).unwrap();
        assert_eq!(fitted.ensemble, again.ensemble);
    }

    #[test]
    fn published_presets() {
        let rows = [
            (TrainConfig::cylinder(), 120, 0.2, 2, 0.7),
            (TrainConfig::wave(), 80, 0.2, 4, 1.0),
            (TrainConfig::burgers(), 100, 0.35, 3, 1.0),
            (TrainConfig::beam(), 80, 0.4, 4, 1.0),
        ];
        for (cfg, rounds, eta, depth, subsample) in rows {
            assert_eq!((cfg.rounds, cfg.learning_rate, cfg.max_depth, cfg.subsample), (rounds, eta, depth, subsample));
            assert_eq!((cfg.leaf_penalty, cfg.l2_penalty), (1e-3, 1e-2));
        }
    }
}
