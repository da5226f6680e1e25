//! Multivariate regression trees grown greedily on the constrained objective.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::qcqp::{solve_leaf_qcqp, LeafProblem};
use super::TrainConfig;
use crate::error::Error;
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode<T> {
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
    Leaf {
        weight: Vec<T>,
    },
}

/// A binary tree stored as an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree<T> {
    pub nodes: Vec<TreeNode<T>>,
}

impl<T: Real> Tree<T> {
    /// Leaf weight for `theta`. Samples with `theta[feature] < threshold` go left.
    pub fn leaf_weight(&self, theta: &[T]) -> &[T] {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if theta[*feature] < *threshold { *left } else { *right };
                }
                TreeNode::Leaf { weight } => return weight,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[TreeNode<T>], idx: usize) -> usize {
            match &nodes[idx] {
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                TreeNode::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }
}

/// Per-round inputs shared by every node of the tree being grown.
pub(crate) struct RoundData<'a, T: Real> {
    pub thetas: &'a [Vec<T>],
    pub grads: &'a [DVector<T>],
    pub preds: &'a [DVector<T>],
    pub in_bag: &'a [bool],
    pub radius: T,
}

pub(crate) struct Grower<'a, T: Real> {
    data: RoundData<'a, T>,
    cfg: &'a TrainConfig,
    nodes: Vec<TreeNode<T>>,
    pub solver_fallbacks: usize,
}

struct LeafFit<T: Real> {
    weight: DVector<T>,
    objective: T,
}

struct Candidate<T: Real> {
    feature: usize,
    threshold: T,
    gain: T,
    left: Vec<usize>,
    right: Vec<usize>,
    left_fit: LeafFit<T>,
    right_fit: LeafFit<T>,
}

impl<'a, T: Real> Grower<'a, T> {
    pub fn new(data: RoundData<'a, T>, cfg: &'a TrainConfig) -> Self {
        Self {
            data,
            cfg,
            nodes: Vec::new(),
            solver_fallbacks: 0,
        }
    }

    /// Grows a tree over `members` (every training sample routed to the root).
    pub fn grow(mut self, members: Vec<usize>) -> (Tree<T>, usize) {
        let root_fit = self.fit_leaf(&members);
        self.nodes.push(TreeNode::Leaf { weight: Vec::new() });
        self.grow_node(0, members, root_fit, 0);
        (Tree { nodes: self.nodes }, self.solver_fallbacks)
    }

    fn grow_node(&mut self, slot: usize, members: Vec<usize>, fit: LeafFit<T>, depth: usize) {
        let in_bag = members.iter().filter(|&&i| self.data.in_bag[i]).count();
        let can_split = depth < self.cfg.max_depth && in_bag >= 2 * self.cfg.min_samples_leaf.max(1);
        let best = if can_split {
            self.best_split(&members, fit.objective)
        } else {
            None
        };
        match best {
            Some(c) if c.gain > T::zero() => {
                let left_slot = self.nodes.len();
                self.nodes.push(TreeNode::Leaf { weight: Vec::new() });
                let right_slot = self.nodes.len();
                self.nodes.push(TreeNode::Leaf { weight: Vec::new() });
                self.nodes[slot] = TreeNode::Split {
                    feature: c.feature,
                    threshold: c.threshold,
                    left: left_slot,
                    right: right_slot,
                };
                self.grow_node(left_slot, c.left, c.left_fit, depth + 1);
                self.grow_node(right_slot, c.right, c.right_fit, depth + 1);
            }
            _ => {
                self.nodes[slot] = TreeNode::Leaf {
                    weight: fit.weight.iter().copied().collect(),
                };
            }
        }
    }

    fn best_split(&mut self, members: &[usize], parent_objective: T) -> Option<Candidate<T>> {
        let d = self.data.thetas[members[0]].len();
        let gamma: T = lit(self.cfg.leaf_penalty);
        let msl = self.cfg.min_samples_leaf.max(1);
        let mut best: Option<Candidate<T>> = None;
        for feature in 0..d {
            let mut bag: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&i| self.data.in_bag[i])
                .collect();
            bag.sort_by(|&a, &b| {
                self.data.thetas[a][feature]
                    .partial_cmp(&self.data.thetas[b][feature])
                    .expect("finite features")
                    .then(a.cmp(&b))
            });
            for pos in 1..bag.len() {
                let lo = self.data.thetas[bag[pos - 1]][feature];
                let hi = self.data.thetas[bag[pos]][feature];
                if !(lo < hi) || pos < msl || bag.len() - pos < msl {
                    continue;
                }
                let threshold = (lo + hi) * lit::<T>(0.5);
                let (left, right): (Vec<usize>, Vec<usize>) = members
                    .iter()
                    .partition(|&&i| self.data.thetas[i][feature] < threshold);
                let left_fit = self.fit_leaf(&left);
                let right_fit = self.fit_leaf(&right);
                let gain = parent_objective - (left_fit.objective + right_fit.objective) - gamma;
                if best.as_ref().map_or(true, |b| gain > b.gain) {
                    best = Some(Candidate {
                        feature,
                        threshold,
                        gain,
                        left,
                        right,
                        left_fit,
                        right_fit,
                    });
                }
            }
        }
        best
    }

    fn fit_leaf(&mut self, members: &[usize]) -> LeafFit<T> {
        let dim = self.data.grads[members[0]].len();
        let mut grad_sum = DVector::zeros(dim);
        let mut count = 0usize;
        for &i in members {
            if self.data.in_bag[i] {
                grad_sum += &self.data.grads[i];
                count += 1;
            }
        }
        let problem = LeafProblem {
            grad_sum,
            hess_scale: lit(count as f64),
            l2: lit(self.cfg.l2_penalty),
            centers: members.iter().map(|&i| &self.data.preds[i]).collect(),
        };
        let weight = if self.cfg.enforce_ball {
            match solve_leaf_qcqp(&problem, self.data.radius) {
                Ok(w) => w,
                Err(Error::SolverFailure { .. }) => {
                    self.solver_fallbacks += 1;
                    DVector::zeros(dim)
                }
                Err(e) => panic!("leaf problem is well-formed by construction: {e}"),
            }
        } else {
            problem.unconstrained()
        };
        let objective = problem.objective(&weight);
        LeafFit { weight, objective }
    }
}
