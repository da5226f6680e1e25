use std::path::{Path, PathBuf};

use grasspod::chart::ReferencePolicy;
use grasspod::harness::problem_defaults;
use grasspod::pdelab::{GridPoint, Problem};
use grasspod::{Error, Result, TrainConfig};
use serde::{Deserialize, Serialize};

/// Strict JSON run configuration. Command-line flags override its fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    /// Explicit parameter points replacing the problem's default grid.
    #[serde(default)]
    pub grid: Option<Vec<GridPoint>>,
    #[serde(default)]
    pub rank: Option<usize>,
    #[serde(default)]
    pub train: Option<TrainConfig>,
    #[serde(default)]
    pub reference: ReferencePolicy,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub folds: Option<usize>,
}

impl RunConfig {
    pub fn for_problem(problem: Problem) -> Self {
        Self {
            problem,
            grid: None,
            rank: None,
            train: None,
            reference: ReferencePolicy::default(),
            out: None,
            seed: None,
            folds: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read(path)?;
        Ok(serde_json::from_slice(&text)?)
    }

    pub fn grid(&self) -> Vec<GridPoint> {
        self.grid.clone().unwrap_or_else(|| self.problem.grid())
    }

    pub fn rank(&self) -> Result<usize> {
        self.rank
            .or(problem_defaults(self.problem).0)
            .ok_or_else(|| Error::InvalidConfig("rank is required for external data (--rank)".into()))
    }

    /// Hyperparameters with the seed applied.
    pub fn train(&self) -> TrainConfig {
        let mut cfg = self.train.clone().unwrap_or_else(|| problem_defaults(self.problem).1);
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(self.train().seed)
    }
}
