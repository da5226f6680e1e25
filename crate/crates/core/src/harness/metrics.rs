use serde::{Deserialize, Serialize};

use crate::error::{shape_mismatch, Error, Result};
use crate::grassmann::PodBasis;
use crate::pod::SnapshotMatrix;

/// `|D - Phi Phi^T D|_F / |D|_F`.
pub fn relative_error(truth: &SnapshotMatrix<f64>, basis: &PodBasis<f64>) -> Result<f64> {
    let d = truth.data();
    let phi = basis.matrix();
    if d.nrows() != phi.nrows() {
        return Err(shape_mismatch("relative_error", (d.nrows(), phi.ncols()), phi.shape()));
    }
    let total = d.norm();
    if total == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let residual = d - phi * (phi.transpose() * d);
    Ok(residual.norm() / total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub min: f64,
    pub max: f64,
}

impl ErrorStats {
    /// Quantiles use linear interpolation between order statistics. Returns
    /// `None` for an empty sample.
    pub fn from_errors(errors: &[f64]) -> Option<Self> {
        if errors.is_empty() {
            return None;
        }
        let mut sorted = errors.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / n;
        let var = sorted.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
        let q = |p: f64| {
            let pos = p * (sorted.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        };
        Some(Self {
            count: sorted.len(),
            mean,
            std: var.sqrt(),
            median: q(0.5),
            q25: q(0.25),
            q75: q(0.75),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        })
    }

    pub fn is_ordered(&self) -> bool {
        self.min <= self.q25 && self.q25 <= self.median && self.median <= self.q75 && self.q75 <= self.max && self.std >= 0.0
    }
}
