//! Per-leaf weight problem:
//!
//! ```text
//! min_w  G^T w + 1/2 (H + lambda) |w|^2
//! s.t.   |w + c_i|^2 <= R^2   for every prior prediction c_i in the leaf
//! ```
//!
//! With an isotropic Hessian this is the Euclidean projection of
//! `a = -G / (H + lambda)` onto an intersection of balls. The minimizer lies in
//! `span{a, c_i}`, so the problem is reduced to that subspace and solved there
//! with a log-barrier Newton method.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Margin by which the unconstrained minimizer must clear every constraint to
/// be returned as is.
pub const UNCONSTRAINED_MARGIN: f64 = 1e-12;

/// Cap on Newton iterations across all barrier stages.
pub const MAX_ITERATIONS: usize = 10_000;

/// Target duality gap of the barrier path, relative to `max(1, |a|^2)`.
const GAP_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct LeafProblem<'a, T: Real> {
    /// `G_j`, the sum of member gradients.
    pub grad_sum: DVector<T>,
    /// Scalar multiplier of the identity in `H_j` (the member count for squared loss).
    pub hess_scale: T,
    pub l2: T,
    /// Prior predictions of the samples routed to the leaf.
    pub centers: Vec<&'a DVector<T>>,
}

impl<T: Real> LeafProblem<'_, T> {
    pub fn curvature(&self) -> T {
        self.hess_scale + self.l2
    }

    pub fn objective(&self, w: &DVector<T>) -> T {
        self.grad_sum.dot(w) + lit::<T>(0.5) * self.curvature() * w.norm_squared()
    }

    /// `-G / (H + lambda)`.
    pub fn unconstrained(&self) -> DVector<T> {
        -&self.grad_sum / self.curvature()
    }

    /// Largest `|w + c_i| - R` over the centers.
    pub fn max_violation(&self, w: &DVector<T>, radius: T) -> T {
        self.centers
            .iter()
            .map(|c| (w + *c).norm() - radius)
            .fold(-radius, |a, b| if b > a { b } else { a })
    }
}

/// Solves the leaf problem within the ball of radius `radius` around the origin.
pub fn solve_leaf_qcqp<T: Real>(problem: &LeafProblem<'_, T>, radius: T) -> Result<DVector<T>> {
    if !(problem.curvature() > T::zero()) {
        return Err(Error::InvalidConfig("leaf curvature must be positive".into()));
    }
    let a = problem.unconstrained();
    let margin: T = lit(UNCONSTRAINED_MARGIN);
    if problem
        .centers
        .iter()
        .all(|c| (&a + *c).norm() <= radius - margin)
    {
        return Ok(a);
    }
    if problem.centers.iter().any(|c| !(c.norm() < radius)) {
        // w = 0 is not strictly feasible; the barrier cannot start.
        return Err(Error::SolverFailure {
            iterations: 0,
            gap: f64::INFINITY,
        });
    }

    let mut centers: Vec<&DVector<T>> = Vec::with_capacity(problem.centers.len());
    for c in &problem.centers {
        if !centers.iter().any(|seen| *seen == *c) {
            centers.push(c);
        }
    }

    let basis = span_basis(std::iter::once(&a).chain(centers.iter().copied()));
    let reduce = |v: &DVector<T>| basis.tr_mul(v);
    let a_red = reduce(&a);
    let c_red: Vec<DVector<T>> = centers.iter().map(|c| reduce(c)).collect();
    let x = barrier_projection(&a_red, &c_red, radius)?;
    Ok(&basis * x)
}

/// Orthonormal basis (as columns) of the span of `vectors`, by modified
/// Gram-Schmidt with one re-orthogonalization pass.
fn span_basis<'a, T: Real + 'a>(vectors: impl Iterator<Item = &'a DVector<T>>) -> DMatrix<T> {
    let mut cols: Vec<DVector<T>> = Vec::new();
    let mut scale = T::zero();
    for v in vectors {
        let norm = v.norm();
        if norm > scale {
            scale = norm;
        }
        let mut u = v.clone();
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dot(&u);
                u.axpy(-proj, q, T::one());
            }
        }
        let un = u.norm();
        if un > lit::<T>(1e-12) * scale && un > T::zero() {
            cols.push(u / un);
        }
    }
    if cols.is_empty() {
        return DMatrix::zeros(0, 0);
    }
    DMatrix::from_columns(&cols)
}

/// Projection of `a` onto `{x : |x + c_i| < R}` by a primal log-barrier
/// method started from the strictly feasible origin.
fn barrier_projection<T: Real>(a: &DVector<T>, centers: &[DVector<T>], radius: T) -> Result<DVector<T>> {
    let k = a.len();
    let m = centers.len();
    let r2 = radius * radius;
    let half: T = lit(0.5);
    let two: T = lit(2.0);
    let four: T = lit(4.0);

    let slacks = |x: &DVector<T>| -> Option<Vec<T>> {
        let mut s = Vec::with_capacity(m);
        for c in centers {
            let v = r2 - (x + c).norm_squared();
            if !(v > T::zero()) {
                return None;
            }
            s.push(v);
        }
        Some(s)
    };
    let merit = |x: &DVector<T>, t: T| -> Option<T> {
        let s = slacks(x)?;
        let barrier = s.iter().fold(T::zero(), |acc, v| acc - v.ln());
        Some(t * half * (x - a).norm_squared() + barrier)
    };

    let scale = a.norm_squared().max(T::one());
    let target_t = lit::<T>(m as f64) / (lit::<T>(GAP_TOL) * scale);
    let mut t = T::one() / scale;
    let mut x = DVector::zeros(k);
    let mut iterations = 0;
    let newton_tol: T = lit(1e-14);

    loop {
        loop {
            iterations += 1;
            if iterations > MAX_ITERATIONS {
                return Err(Error::SolverFailure {
                    iterations,
                    gap: to_f64(lit::<T>(m as f64) / t),
                });
            }
            let s = slacks(&x).ok_or(Error::SolverFailure {
                iterations,
                gap: f64::INFINITY,
            })?;
            let mut grad = (&x - a) * t;
            let mut hess = DMatrix::<T>::identity(k, k) * t;
            for (c, si) in centers.iter().zip(&s) {
                let u = &x + c;
                grad.axpy(two / *si, &u, T::one());
                for i in 0..k {
                    hess[(i, i)] += two / *si;
                }
                hess.ger(four / (*si * *si), &u, &u, T::one());
            }
            let step = match hess.clone().cholesky() {
                Some(ch) => -ch.solve(&grad),
                None => {
                    return Err(Error::SolverFailure {
                        iterations,
                        gap: f64::INFINITY,
                    })
                }
            };
            let decrement = -grad.dot(&step);
            if decrement * half <= newton_tol * t.max(T::one()) {
                break;
            }
            let f0 = merit(&x, t).expect("current iterate is feasible");
            let mut alpha = T::one();
            let mut accepted = false;
            for _ in 0..60 {
                let trial = &x + &step * alpha;
                if let Some(f1) = merit(&trial, t) {
                    if f1 <= f0 - lit::<T>(0.25) * alpha * decrement {
                        x = trial;
                        accepted = true;
                        break;
                    }
                }
                alpha *= half;
            }
            if !accepted {
                // no progress possible at this precision
                break;
            }
        }
        if t >= target_t {
            return Ok(x);
        }
        t *= lit(10.0);
        if t > target_t {
            t = target_t;
        }
    }
}
