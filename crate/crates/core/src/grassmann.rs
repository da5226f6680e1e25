//! Riemannian geometry of the Grassmann manifold G(r, n).
//!
//! Points are stored as Stiefel representatives: `n x r` matrices with
//! orthonormal columns. Two representatives `Phi` and `Phi J` (with `J`
//! orthogonal `r x r`) denote the same subspace. Tangent vectors are stored as
//! their horizontal lift `Z`, an `n x r` matrix, with the trace inner product
//! `<Z1, Z2> = tr(Z1^T Z2)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{shape_mismatch, Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Principal angles at or above `pi/2 - CUT_LOCUS_TOL` are treated as the cut locus.
pub const CUT_LOCUS_TOL: f64 = 1e-8;

/// An `n x r` matrix with orthonormal columns representing a point of G(r, n).
#[derive(Debug, Clone, PartialEq)]
pub struct PodBasis<T: Real> {
    matrix: DMatrix<T>,
}

impl<T: Real> PodBasis<T> {
    /// Wraps a matrix whose columns are already orthonormal.
    ///
    /// The sign convention is not imposed here; see [`PodBasis::sign_normalized`].
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        let (n, r) = matrix.shape();
        if r == 0 || r >= n {
            return Err(Error::InvalidRank { n, r });
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("basis"));
        }
        let deviation = orthonormality_deviation(&matrix);
        if !(deviation <= T::ortho_tol()) {
            return Err(Error::NotOrthonormal {
                deviation: to_f64(deviation),
            });
        }
        Ok(Self { matrix })
    }

    /// Orthonormalizes the columns of `matrix` with a thin QR factorization and
    /// applies the sign convention.
    pub fn orthonormalize(matrix: DMatrix<T>) -> Result<Self> {
        let (n, r) = matrix.shape();
        if r == 0 || r >= n {
            return Err(Error::InvalidRank { n, r });
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("basis"));
        }
        let q = matrix.qr().q();
        let mut q = q.columns(0, r).into_owned();
        normalize_signs(&mut q);
        Self::new(q)
    }

    /// Returns the representative with the deterministic column sign convention.
    pub fn sign_normalized(mut self) -> Self {
        normalize_signs(&mut self.matrix);
        self
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    /// Ambient dimension.
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// Subspace dimension.
    pub fn r(&self) -> usize {
        self.matrix.ncols()
    }

    fn check_same_shape(&self, other: &Self, context: &'static str) -> Result<()> {
        if self.matrix.shape() != other.matrix.shape() {
            return Err(shape_mismatch(
                context,
                self.matrix.shape(),
                other.matrix.shape(),
            ));
        }
        Ok(())
    }
}

/// Largest absolute entry of `M^T M - I`.
pub fn orthonormality_deviation<T: Real>(m: &DMatrix<T>) -> T {
    let r = m.ncols();
    (m.transpose() * m - DMatrix::<T>::identity(r, r)).amax()
}

/// Flips column signs so that the entry of largest magnitude in each column is
/// non-negative. Ties go to the lowest row index.
pub fn normalize_signs<T: Real>(m: &mut DMatrix<T>) {
    for mut col in m.column_iter_mut() {
        let mut best = 0;
        let mut best_abs = T::zero();
        for (i, x) in col.iter().enumerate() {
            if x.abs() > best_abs {
                best_abs = x.abs();
                best = i;
            }
        }
        if col[best] < T::zero() {
            col.neg_mut();
        }
    }
}

/// Horizontal lift `Z` of a tangent vector at some base point.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalLift<T: Real> {
    matrix: DMatrix<T>,
}

impl<T: Real> HorizontalLift<T> {
    pub fn new(matrix: DMatrix<T>) -> Self {
        Self { matrix }
    }

    pub fn zeros(n: usize, r: usize) -> Self {
        Self::new(DMatrix::zeros(n, r))
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    pub fn norm(&self) -> TangentNorm<T> {
        TangentNorm(self.matrix.norm())
    }

    /// Largest `|diag(Z^T Phi)|`, the residual of the embedding's horizontality condition.
    pub fn diagonal_residual(&self, base: &PodBasis<T>) -> T {
        self.matrix
            .column_iter()
            .zip(base.matrix().column_iter())
            .map(|(z, phi)| z.dot(&phi).abs())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// Largest `|Z^T Phi|` entry, the residual of full horizontality.
    pub fn full_residual(&self, base: &PodBasis<T>) -> T {
        (self.matrix.transpose() * base.matrix()).amax()
    }
}

/// Length of a tangent vector under the trace metric, in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TangentNorm<T>(pub T);

impl<T: Real> TangentNorm<T> {
    pub fn value(self) -> T {
        self.0
    }
}

/// Riemannian exponential map: follows the geodesic from `base` with initial
/// velocity `lift` for unit time.
pub fn exp_map<T: Real>(base: &PodBasis<T>, lift: &HorizontalLift<T>) -> Result<PodBasis<T>> {
    let z = lift.matrix();
    if z.shape() != base.matrix().shape() {
        return Err(shape_mismatch("exp_map", base.matrix().shape(), z.shape()));
    }
    if z.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("horizontal lift"));
    }
    let (u, s, v) = T::thin_svd(z).ok_or_else(svd_failure)?;
    let cos = DMatrix::from_diagonal(&s.map(|s| s.cos()));
    let sin = DMatrix::from_diagonal(&s.map(|s| s.sin()));
    let moved = base.matrix() * &v * cos + u * sin;
    PodBasis::orthonormalize(moved)
}

/// Riemannian logarithm map: the horizontal lift at `base` whose geodesic reaches
/// the subspace spanned by `target`.
///
/// Uses `M = (I - Phi Phi^T) Psi (Phi^T Psi)^{-1} = U S V^T` and returns
/// `Z = U atan(S) V^T`.
pub fn log_map<T: Real>(base: &PodBasis<T>, target: &PodBasis<T>) -> Result<HorizontalLift<T>> {
    base.check_same_shape(target, "log_map")?;
    let angles = principal_angles(base, target)?;
    let max_angle = angles[angles.len() - 1];
    if to_f64(max_angle) >= std::f64::consts::FRAC_PI_2 - CUT_LOCUS_TOL {
        return Err(Error::CutLocus {
            max_angle: to_f64(max_angle),
        });
    }
    let phi = base.matrix();
    let psi = target.matrix();
    let overlap = phi.transpose() * psi;
    let inv = overlap
        .clone()
        .try_inverse()
        .ok_or(Error::SingularProjection)?;
    let complement = psi - phi * &overlap;
    let m = complement * inv;
    let (u, s, v) = T::thin_svd(&m).ok_or_else(svd_failure)?;
    let atan = DMatrix::from_diagonal(&s.map(|s| s.atan()));
    Ok(HorizontalLift::new(u * atan * v.transpose()))
}

/// Principal angles between the subspaces of `a` and `b`, ascending, in `[0, pi/2]`.
///
/// Large angles come from `arccos` of the singular values of `a^T b` (clamped
/// to `[-1, 1]`); angles whose cosine exceeds `1/sqrt(2)` come from `arcsin` of
/// the singular values of `(I - a a^T) b`, which keeps small angles accurate.
pub fn principal_angles<T: Real>(a: &PodBasis<T>, b: &PodBasis<T>) -> Result<DVector<T>> {
    a.check_same_shape(b, "principal_angles")?;
    let overlap = a.matrix().transpose() * b.matrix();
    let mut cosines: Vec<T> = T::singular_values(&overlap)
        .ok_or_else(svd_failure)?
        .iter()
        .map(|s| clamp_unit(*s))
        .collect();
    cosines.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));

    let residual = b.matrix() - a.matrix() * (a.matrix().transpose() * b.matrix());
    let mut sines: Vec<T> = T::singular_values(&residual)
        .ok_or_else(svd_failure)?
        .iter()
        .map(|s| clamp_unit(*s))
        .collect();
    sines.sort_by(|x, y| x.partial_cmp(y).expect("finite singular values"));

    let threshold: T = lit(0.5);
    let angles = cosines
        .iter()
        .zip(sines.iter())
        .map(|(c, s)| {
            if *c * *c < threshold {
                c.acos()
            } else {
                s.asin()
            }
        })
        .collect::<Vec<_>>();
    let mut angles = angles;
    angles.sort_by(|x, y| x.partial_cmp(y).expect("finite angles"));
    Ok(DVector::from_vec(angles))
}

fn svd_failure() -> Error {
    Error::Instability("SVD did not converge".into())
}

fn clamp_unit<T: Real>(x: T) -> T {
    if x > T::one() {
        T::one()
    } else if x < -T::one() {
        -T::one()
    } else {
        x
    }
}

/// Geodesic distance `sqrt(sum theta_i^2)` over the principal angles.
pub fn geodesic_distance<T: Real>(a: &PodBasis<T>, b: &PodBasis<T>) -> Result<T> {
    Ok(principal_angles(a, b)?.norm())
}
