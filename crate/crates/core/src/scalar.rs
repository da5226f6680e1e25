use nalgebra::{DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar the numerical core is generic over: `f32` or `f64`.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default + Send + Sync {
    /// Tolerance used when validating orthonormality of bases.
    fn ortho_tol() -> Self;

    /// Thin SVD returning the left singular vectors (`m x min(m, n)`) and the
    /// singular values in non-increasing order.
    fn thin_svd_left(m: &DMatrix<Self>) -> Option<(DMatrix<Self>, DVector<Self>)>;

    /// Thin SVD `m = U diag(s) V^T` returning `(U, s, V)`.
    fn thin_svd(m: &DMatrix<Self>) -> Option<(DMatrix<Self>, DVector<Self>, DMatrix<Self>)>;

    /// Singular values in non-increasing order.
    fn singular_values(m: &DMatrix<Self>) -> Option<DVector<Self>>;
}

macro_rules! impl_real {
    ($t:ty, $tol:expr) => {
        impl Real for $t {
            fn ortho_tol() -> Self {
                $tol
            }

            fn thin_svd_left(m: &DMatrix<Self>) -> Option<(DMatrix<Self>, DVector<Self>)> {
                let a = faer::Mat::<$t>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
                let svd = a.thin_svd().ok()?;
                let u = svd.U();
                let s = svd.S().column_vector();
                Some((
                    DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]),
                    DVector::from_fn(s.nrows(), |i, _| s[i]),
                ))
            }

            fn thin_svd(m: &DMatrix<Self>) -> Option<(DMatrix<Self>, DVector<Self>, DMatrix<Self>)> {
                let a = faer::Mat::<$t>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
                let svd = a.thin_svd().ok()?;
                let (u, v) = (svd.U(), svd.V());
                let s = svd.S().column_vector();
                Some((
                    DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]),
                    DVector::from_fn(s.nrows(), |i, _| s[i]),
                    DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)]),
                ))
            }

            fn singular_values(m: &DMatrix<Self>) -> Option<DVector<Self>> {
                let a = faer::Mat::<$t>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
                let s = a.singular_values().ok()?;
                Some(DVector::from_vec(s))
            }
        }
    };
}

impl_real!(f64, 1e-10);
impl_real!(f32, 1e-4);

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in target scalar")
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
