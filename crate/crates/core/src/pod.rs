//! Snapshot matrices and truncated POD bases.

use nalgebra::{DMatrix, DVector};

use crate::error::{shape_mismatch, Error, Result};
use crate::grassmann::{normalize_signs, PodBasis};
use crate::scalar::Real;

/// Solution snapshots for one parameter point; column `j` is the state at time `t_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix<T: Real> {
    data: DMatrix<T>,
    parameter: Vec<f64>,
    label: String,
}

impl<T: Real> SnapshotMatrix<T> {
    pub fn new(data: DMatrix<T>, parameter: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::InvalidDataset("empty snapshot matrix".into()));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("snapshot matrix"));
        }
        Ok(Self {
            data,
            parameter,
            label: label.into(),
        })
    }

    pub fn data(&self) -> &DMatrix<T> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<T> {
        self.data
    }

    pub fn parameter(&self) -> &[f64] {
        &self.parameter
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Returns a copy with the temporal mean subtracted from every row.
    pub fn centered(&self) -> Self {
        let mean = self.data.column_mean();
        let mut data = self.data.clone();
        for mut col in data.column_iter_mut() {
            col -= &mean;
        }
        Self {
            data,
            parameter: self.parameter.clone(),
            label: self.label.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PodResult<T: Real> {
    pub basis: PodBasis<T>,
    /// All singular values of the snapshot matrix, non-increasing.
    pub singular_values: DVector<T>,
    /// `sum_{i<=r} sigma_i^2 / sum_i sigma_i^2`.
    pub energy_captured: T,
}

impl<T: Real> PodResult<T> {
    /// Relative error of the optimal rank-r projection:
    /// `sqrt(sum_{i>r} sigma_i^2 / sum_i sigma_i^2)`.
    pub fn truncation_floor(&self) -> T {
        let r = self.basis.r();
        tail_energy_ratio(&self.singular_values, r).sqrt()
    }
}

fn tail_energy_ratio<T: Real>(sv: &DVector<T>, r: usize) -> T {
    let total = sv.norm_squared();
    if total == T::zero() {
        return T::zero();
    }
    let tail: T = sv.iter().skip(r).fold(T::zero(), |a, s| a + *s * *s);
    tail / total
}

/// Rank-`r` POD basis of `snapshots`: the first `r` left singular vectors,
/// sign-normalized.
pub fn compute_pod<T: Real>(snapshots: &SnapshotMatrix<T>, r: usize) -> Result<PodResult<T>> {
    let d = snapshots.data();
    let max = d.nrows().min(d.ncols());
    if r == 0 || r >= d.nrows() {
        return Err(Error::InvalidRank { n: d.nrows(), r });
    }
    if r > max {
        return Err(Error::RankTooLarge { requested: r, max });
    }
    let (u, singular_values) =
        T::thin_svd_left(d).ok_or_else(|| Error::Instability("SVD did not converge".into()))?;
    let mut basis = u.columns(0, r).into_owned();
    normalize_signs(&mut basis);
    let energy_captured = T::one() - tail_energy_ratio(&singular_values, r);
    Ok(PodResult {
        basis: PodBasis::new(basis)?,
        singular_values,
        energy_captured,
    })
}

/// Frobenius norm of `D - Phi Phi^T D`.
pub fn projection_error<T: Real>(snapshots: &SnapshotMatrix<T>, basis: &PodBasis<T>) -> Result<T> {
    let d = snapshots.data();
    let phi = basis.matrix();
    if d.nrows() != phi.nrows() {
        return Err(shape_mismatch(
            "projection_error",
            (d.nrows(), phi.ncols()),
            phi.shape(),
        ));
    }
    let coeffs = phi.transpose() * d;
    Ok((d - phi * coeffs).norm())
}

/// Smallest rank whose captured energy reaches `fraction`.
pub fn rank_for_energy<T: Real>(singular_values: &DVector<T>, fraction: T) -> usize {
    let total = singular_values.norm_squared();
    let mut acc = T::zero();
    for (i, s) in singular_values.iter().enumerate() {
        acc += *s * *s;
        if acc >= fraction * total {
            return i + 1;
        }
    }
    singular_values.len()
}
