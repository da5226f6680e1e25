//! Injective Euclidean chart around a reference basis.
//!
//! The chart maps a basis `Psi` near the reference `Phi0` to
//! `y = F vec(Log(Phi0, Psi))` in `R^{nr-r}` and back through
//! `Exp(Phi0, Mat(F^T y))`. `vec` stacks columns (column-major) and `Mat` is
//! its inverse.
//!
//! `F` is block diagonal: block `k` is the `(n-1) x n` matrix whose rows span
//! the orthogonal complement of the reference column `phi_k`. Each block is
//! stored implicitly as a Householder reflector `H_k` with `H_k phi_k = ±e_p`;
//! the block consists of the rows of `H_k` with row `p` removed, in ascending
//! row order. This satisfies `F F^T = I` and `Phi~ F^T = 0` exactly in exact
//! arithmetic while storing only `O(nr)` numbers.

use nalgebra::{DMatrix, DVector};

use crate::error::{shape_mismatch, Error, Result};
use crate::grassmann::{exp_map, geodesic_distance, log_map, HorizontalLift, PodBasis};
use crate::scalar::{lit, to_f64, Real};

/// Tolerance above the radius before `wrap_back` refuses a vector.
pub const BALL_TOL: f64 = 1e-9;

/// Householder reflector `H = I - 2 v v^T / (v^T v)` with the dropped pivot row.
#[derive(Debug, Clone, PartialEq)]
pub struct Reflector<T: Real> {
    pub vector: DVector<T>,
    pub pivot: usize,
}

impl<T: Real> Reflector<T> {
    fn for_column(phi: &DVector<T>) -> Self {
        let mut pivot = 0;
        let mut best = T::zero();
        for (i, x) in phi.iter().enumerate() {
            if x.abs() > best {
                best = x.abs();
                pivot = i;
            }
        }
        let mut vector = phi.clone();
        let sign = if phi[pivot] < T::zero() { -T::one() } else { T::one() };
        vector[pivot] += sign * phi.norm();
        Self { vector, pivot }
    }

    fn apply(&self, x: &DVector<T>) -> DVector<T> {
        let vv = self.vector.norm_squared();
        let scale = lit::<T>(2.0) * self.vector.dot(x) / vv;
        x - &self.vector * scale
    }

    /// Rows of `H` with the pivot removed, applied to `x`.
    fn project(&self, x: &DVector<T>) -> DVector<T> {
        let full = self.apply(x);
        DVector::from_iterator(
            full.len() - 1,
            full.iter()
                .enumerate()
                .filter(|(i, _)| *i != self.pivot)
                .map(|(_, v)| *v),
        )
    }

    /// Transpose of [`Reflector::project`].
    fn lift(&self, y: &[T]) -> DVector<T> {
        let n = y.len() + 1;
        let mut full = DVector::zeros(n);
        let mut src = y.iter();
        for i in 0..n {
            if i != self.pivot {
                full[i] = *src.next().expect("length n-1");
            }
        }
        self.apply(&full)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart<T: Real> {
    reference: PodBasis<T>,
    reflectors: Vec<Reflector<T>>,
    radius: T,
}

impl<T: Real> Chart<T> {
    /// Builds the chart for `reference` with radius `pi/2`.
    pub fn new(reference: PodBasis<T>) -> Self {
        let reflectors = reference
            .matrix()
            .column_iter()
            .map(|c| Reflector::for_column(&c.into_owned()))
            .collect();
        Self {
            reference,
            reflectors,
            radius: T::frac_pi_2(),
        }
    }

    /// Reassembles a chart from stored parts (used when loading model files).
    pub fn from_parts(reference: PodBasis<T>, reflectors: Vec<Reflector<T>>, radius: T) -> Result<Self> {
        let (n, r) = reference.matrix().shape();
        if reflectors.len() != r
            || reflectors
                .iter()
                .any(|h| h.vector.len() != n || h.pivot >= n || h.vector.norm_squared() == T::zero())
        {
            return Err(Error::Format("chart reflectors do not match reference".into()));
        }
        Ok(Self {
            reference,
            reflectors,
            radius,
        })
    }

    pub fn reference(&self) -> &PodBasis<T> {
        &self.reference
    }

    pub fn reflectors(&self) -> &[Reflector<T>] {
        &self.reflectors
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn n(&self) -> usize {
        self.reference.n()
    }

    pub fn r(&self) -> usize {
        self.reference.r()
    }

    /// Dimension `nr - r` of the embedding space.
    pub fn dim(&self) -> usize {
        self.n() * self.r() - self.r()
    }

    /// `y = F vec(Z)`.
    pub fn flatten(&self, lift: &HorizontalLift<T>) -> Result<DVector<T>> {
        let z = lift.matrix();
        if z.shape() != self.reference.matrix().shape() {
            return Err(shape_mismatch("chart.flatten", self.reference.matrix().shape(), z.shape()));
        }
        let block = self.n() - 1;
        let mut y = DVector::zeros(self.dim());
        for (k, h) in self.reflectors.iter().enumerate() {
            let part = h.project(&z.column(k).into_owned());
            y.rows_mut(k * block, block).copy_from(&part);
        }
        Ok(y)
    }

    /// `Z = Mat_{n,r}(F^T y)`.
    pub fn unflatten(&self, y: &DVector<T>) -> Result<HorizontalLift<T>> {
        if y.len() != self.dim() {
            return Err(shape_mismatch("chart.unflatten", (self.dim(), 1), (y.len(), 1)));
        }
        let block = self.n() - 1;
        let mut z = DMatrix::zeros(self.n(), self.r());
        for (k, h) in self.reflectors.iter().enumerate() {
            let col = h.lift(&y.as_slice()[k * block..(k + 1) * block]);
            z.set_column(k, &col);
        }
        Ok(HorizontalLift::new(z))
    }

    /// Embeds `basis` as `F vec(Log(reference, basis))`.
    pub fn embed(&self, basis: &PodBasis<T>) -> Result<DVector<T>> {
        let lift = log_map(&self.reference, basis)?;
        let y = self.flatten(&lift)?;
        let norm = y.norm();
        if !(norm < self.radius) {
            return Err(Error::OutOfChart { norm: to_f64(norm) });
        }
        Ok(y)
    }

    /// Maps `y` back to the manifold through `Exp(reference, Mat(F^T y))`.
    pub fn wrap_back(&self, y: &DVector<T>) -> Result<PodBasis<T>> {
        if y.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("embedded vector"));
        }
        let norm = y.norm();
        if norm > self.radius + lit(BALL_TOL) {
            return Err(Error::BallViolation { norm: to_f64(norm) });
        }
        if norm >= self.radius {
            log::warn!("wrap_back on the boundary of the injectivity ball (|y| = {})", to_f64(norm));
        }
        exp_map(&self.reference, &self.unflatten(y)?)
    }

    /// Dense `F`, `(nr-r) x nr`. Intended for small problems and checks.
    pub fn dense_f(&self) -> DMatrix<T> {
        let (n, r) = (self.n(), self.r());
        let mut f = DMatrix::zeros(self.dim(), n * r);
        let block = n - 1;
        for (k, h) in self.reflectors.iter().enumerate() {
            for j in 0..n {
                let mut e = DVector::zeros(n);
                e[j] = T::one();
                let col = h.project(&e);
                f.view_mut((k * block, k * n + j), (block, 1)).copy_from(&col);
            }
        }
        f
    }

    /// The `r x nr` block matrix `diag(phi_1^T, ..., phi_r^T)`.
    pub fn phi_tilde(&self) -> DMatrix<T> {
        let (n, r) = (self.n(), self.r());
        let mut m = DMatrix::zeros(r, n * r);
        for k in 0..r {
            let col = self.reference.matrix().column(k).transpose();
            m.view_mut((k, k * n), (1, n)).copy_from(&col);
        }
        m
    }
}

/// How the chart reference is chosen among training bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferencePolicy {
    /// Training basis minimizing the maximum geodesic distance to the others.
    MinimaxCenter,
    First,
    Index(usize),
}

impl Default for ReferencePolicy {
    fn default() -> Self {
        Self::MinimaxCenter
    }
}

/// Candidate reference indices in the order they should be tried.
pub fn reference_candidates<T: Real>(bases: &[PodBasis<T>], policy: ReferencePolicy) -> Result<Vec<usize>> {
    if bases.is_empty() {
        return Err(Error::InvalidDataset("no training bases".into()));
    }
    match policy {
        ReferencePolicy::First => Ok(vec![0]),
        ReferencePolicy::Index(i) if i < bases.len() => Ok(vec![i]),
        ReferencePolicy::Index(i) => Err(Error::InvalidConfig(format!(
            "reference index {i} out of range for {} training bases",
            bases.len()
        ))),
        ReferencePolicy::MinimaxCenter => {
            let m = bases.len();
            let mut radius = vec![T::zero(); m];
            for i in 0..m {
                for j in (i + 1)..m {
                    let d = geodesic_distance(&bases[i], &bases[j])?;
                    if d > radius[i] {
                        radius[i] = d;
                    }
                    if d > radius[j] {
                        radius[j] = d;
                    }
                }
            }
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| {
                radius[a]
                    .partial_cmp(&radius[b])
                    .expect("finite distances")
                    .then(a.cmp(&b))
            });
            Ok(order)
        }
    }
}

/// A chart together with the embedded training targets.
#[derive(Debug, Clone)]
pub struct TrainingChart<T: Real> {
    pub chart: Chart<T>,
    pub reference_index: usize,
    pub embedded: Vec<DVector<T>>,
}

/// Chooses a reference according to `policy` and embeds every training basis.
///
/// Candidates are tried in policy order; the first one under which every
/// basis lands strictly inside the ball wins. When none does, the error lists
/// the samples that failed for the first candidate.
pub fn build_training_chart<T: Real>(
    bases: &[PodBasis<T>],
    policy: ReferencePolicy,
) -> Result<TrainingChart<T>> {
    let candidates = reference_candidates(bases, policy)?;
    let mut first_failure: Option<Vec<usize>> = None;
    for &idx in &candidates {
        let chart = Chart::new(bases[idx].clone());
        let mut embedded = Vec::with_capacity(bases.len());
        let mut offending = Vec::new();
        for (i, b) in bases.iter().enumerate() {
            match chart.embed(b) {
                Ok(y) => embedded.push(y),
                Err(Error::OutOfChart { .. }) | Err(Error::CutLocus { .. }) | Err(Error::SingularProjection) => {
                    offending.push(i)
                }
                Err(e) => return Err(e),
            }
        }
        if offending.is_empty() {
            return Ok(TrainingChart {
                chart,
                reference_index: idx,
                embedded,
            });
        }
        first_failure.get_or_insert(offending);
    }
    Err(Error::NoFeasibleReference {
        offending: first_failure.unwrap_or_default(),
    })
}
