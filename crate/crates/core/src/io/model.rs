use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::write_atomic;
use crate::chart::{Chart, ReferencePolicy, Reflector};
use crate::cxgboost::{Ensemble, TrainConfig};
use crate::error::{Error, Result};
use crate::grassmann::PodBasis;
use crate::harness::TrainedModel;
use crate::pdelab::Problem;
use crate::pod::SnapshotMatrix;

const FORMAT: &str = "grasspod-model";
const VERSION: u32 = 1;

/// Identifies the training data a model was fitted on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fingerprint {
    pub n: usize,
    pub r: usize,
    pub n_train: usize,
    /// SHA-256 over the training parameters and snapshot values.
    pub sha256: String,
}

impl Fingerprint {
    pub fn of(snapshots: &[&SnapshotMatrix<f64>], r: usize) -> Self {
        let mut h = Sha256::new();
        for s in snapshots {
            for p in s.parameter() {
                h.update(p.to_le_bytes());
            }
            h.update((s.data().nrows() as u64).to_le_bytes());
            h.update((s.data().ncols() as u64).to_le_bytes());
            for v in s.data().iter() {
                h.update(v.to_le_bytes());
            }
        }
        let digest = h.finalize();
        Self {
            n: snapshots.first().map_or(0, |s| s.data().nrows()),
            r,
            n_train: snapshots.len(),
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReflectorData {
    vector: Vec<f64>,
    pivot: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartData {
    n: usize,
    r: usize,
    /// Column-major reference basis.
    reference: Vec<f64>,
    reflectors: Vec<ReflectorData>,
    radius: f64,
}

impl ChartData {
    pub fn from_chart(chart: &Chart<f64>) -> Self {
        Self {
            n: chart.n(),
            r: chart.r(),
            reference: chart.reference().matrix().as_slice().to_vec(),
            reflectors: chart
                .reflectors()
                .iter()
                .map(|h| ReflectorData {
                    vector: h.vector.as_slice().to_vec(),
                    pivot: h.pivot,
                })
                .collect(),
            radius: chart.radius(),
        }
    }

    pub fn to_chart(&self) -> Result<Chart<f64>> {
        if self.reference.len() != self.n * self.r {
            return Err(Error::Format("chart reference has the wrong length".into()));
        }
        let reference = PodBasis::new(DMatrix::from_column_slice(self.n, self.r, &self.reference))?;
        let reflectors = self
            .reflectors
            .iter()
            .map(|h| Reflector {
                vector: DVector::from_column_slice(&h.vector),
                pivot: h.pivot,
            })
            .collect();
        Chart::from_parts(reference, reflectors, self.radius)
    }
}

/// Self-contained trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub problem: Problem,
    pub rank: usize,
    pub config: TrainConfig,
    pub reference_policy: ReferencePolicy,
    /// Index of the reference among the manifest entries.
    pub reference_index: usize,
    pub fingerprint: Fingerprint,
    pub chart: ChartData,
    pub ensemble: Ensemble<f64>,
    /// Training parameters and embeddings, kept for the interpolation baseline.
    pub train_parameters: Vec<Vec<f64>>,
    pub train_embedded: Vec<Vec<f64>>,
}

impl ModelFile {
    pub fn new(
        problem: Problem,
        rank: usize,
        config: TrainConfig,
        reference_policy: ReferencePolicy,
        model: &TrainedModel,
        fingerprint: Fingerprint,
    ) -> Self {
        Self {
            format: FORMAT.into(),
            version: VERSION,
            problem,
            rank,
            config,
            reference_policy,
            reference_index: model.reference_index,
            fingerprint,
            chart: ChartData::from_chart(&model.chart),
            ensemble: model.ensemble.clone(),
            train_parameters: model.train_thetas.clone(),
            train_embedded: model.train_embedded.iter().map(|y| y.as_slice().to_vec()).collect(),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut bytes = serde_json::to_vec(self)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let m: ModelFile = serde_json::from_slice(&fs::read(path)?)?;
        if m.format != FORMAT || m.version != VERSION {
            return Err(Error::Format(format!("unsupported model format {} v{}", m.format, m.version)));
        }
        Ok(m)
    }

    /// Rebuilds the in-memory model. The fit report is not stored and comes back empty.
    pub fn to_trained(&self) -> Result<TrainedModel> {
        let chart = self.chart.to_chart()?;
        if self.ensemble.output_dim != chart.dim() {
            return Err(Error::Format("ensemble output does not match the chart".into()));
        }
        Ok(TrainedModel {
            chart,
            reference_index: self.reference_index,
            ensemble: self.ensemble.clone(),
            report: crate::cxgboost::FitReport {
                loss_history: Vec::new(),
                max_prediction_norm: 0.0,
                solver_fallbacks: 0,
            },
            train_thetas: self.train_parameters.clone(),
            train_embedded: self.train_embedded.iter().map(|y| DVector::from_column_slice(y)).collect(),
        })
    }

    /// Checks that snapshots of shape `n x _` can be scored at this model's rank.
    pub fn check_compatible(&self, n: usize, r: usize) -> Result<()> {
        if self.fingerprint.n != n || self.fingerprint.r != r {
            return Err(Error::InvalidDataset(format!(
                "model was trained with n={}, r={} but data has n={n}, r={r}",
                self.fingerprint.n, self.fingerprint.r
            )));
        }
        Ok(())
    }
}
