//! Damped Euler-Bernoulli beam
//! `u_tt + 2 gamma u_t + alpha^4 u_xxxx = sin(mu1 pi t) g(x; 0.25) + sin(mu2 pi t) g(x; 0.75)`
//! on `[0, 1]`, starting at rest.
//!
//! Two support types are available. Simply supported ends use the square of
//! the Dirichlet second-difference operator. The cantilever (the default) uses
//! the curvature-energy stiffness `C^T W C` with a lumped mass. Time
//! integration is Newmark average acceleration (beta = 1/4, gamma = 1/2).
//!
//! With simply supported ends the two loads sit symmetrically, so `mu1 = mu2`
//! gives a mirror-symmetric response whose POD subspace is orthogonal to part
//! of every asymmetric one.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pod::SnapshotMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamSupport {
    /// `u = u_xx = 0` at both ends.
    SimplySupported,
    /// Clamped at `x = 0` (`u = u_x = 0`), free at `x = 1` (`u_xx = u_xxx = 0`).
    Cantilever,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSpec {
    pub mu1: f64,
    pub mu2: f64,
    pub alpha: f64,
    pub damping: f64,
    pub support: BeamSupport,
    pub nx: usize,
    pub nt: usize,
    pub t_final: f64,
    pub load_centers: [f64; 2],
    pub load_width: f64,
    /// Multipliers on the two loads (1, 1 for the physical problem).
    pub load_scale: [f64; 2],
    /// Forcing is switched off for `t > cutoff` when set.
    pub forcing_cutoff: Option<f64>,
    /// Newmark steps per output interval.
    pub substeps: usize,
}

impl BeamSpec {
    pub fn new(mu1: f64, mu2: f64) -> Self {
        Self {
            mu1,
            mu2,
            alpha: 0.25,
            damping: 0.05,
            support: BeamSupport::Cantilever,
            nx: 200,
            nt: 100,
            t_final: 8.0,
            load_centers: [0.25, 0.75],
            load_width: 0.02,
            load_scale: [1.0, 1.0],
            forcing_cutoff: None,
            substeps: 16,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.mu1 > 0.0 && self.mu2 > 0.0) {
            return Err(Error::InvalidConfig("beam frequencies must be positive".into()));
        }
        if self.nx < 5 || self.nt < 1 || self.substeps < 1 || !(self.t_final > 0.0) {
            return Err(Error::InvalidConfig("beam grid too small".into()));
        }
        if !(self.load_width > 0.0) {
            return Err(Error::InvalidConfig("beam load width must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BeamOutput {
    /// `nx x nt` displacements, boundary rows included.
    pub snapshots: DMatrix<f64>,
    /// Discrete energy `1/2 |v|^2 + 1/2 u^T K u` after every Newmark step.
    pub energy: Vec<f64>,
    /// Times matching `energy`.
    pub times: Vec<f64>,
}

pub fn simulate_beam(spec: &BeamSpec) -> Result<BeamOutput> {
    spec.validate()?;
    let h = 1.0 / (spec.nx - 1) as f64;
    let (first, stiffness, mass) = match spec.support {
        BeamSupport::SimplySupported => {
            let m = spec.nx - 2;
            let d2 = second_difference(m, h);
            (1, &d2 * &d2, DVector::from_element(m, 1.0))
        }
        BeamSupport::Cantilever => cantilever_operators(spec.nx - 1, h),
    };
    let m = stiffness.nrows();
    let stiffness = stiffness * spec.alpha.powi(4);
    let c = 2.0 * spec.damping;
    let interval = spec.t_final / spec.nt as f64;
    let dt = interval / spec.substeps as f64;
    let (beta, gamma) = (0.25, 0.5);
    let mut effective = &stiffness * (beta * dt * dt);
    for i in 0..m {
        effective[(i, i)] += mass[i] * (1.0 + gamma * dt * c);
    }
    let chol = effective
        .cholesky()
        .ok_or_else(|| Error::Instability("beam system matrix is not positive definite".into()))?;

    let xs: Vec<f64> = (first..first + m).map(|i| i as f64 * h).collect();
    let gauss = |center: f64| {
        DVector::from_iterator(
            m,
            xs.iter()
                .map(|x| (-(x - center).powi(2) / (2.0 * spec.load_width.powi(2))).exp()),
        )
    };
    let g1 = gauss(spec.load_centers[0]) * spec.load_scale[0];
    let g2 = gauss(spec.load_centers[1]) * spec.load_scale[1];
    let pi = std::f64::consts::PI;
    let force = |t: f64| -> DVector<f64> {
        if spec.forcing_cutoff.is_some_and(|cut| t > cut) {
            return DVector::zeros(m);
        }
        &g1 * (spec.mu1 * pi * t).sin() + &g2 * (spec.mu2 * pi * t).sin()
    };

    let mut u = DVector::<f64>::zeros(m);
    let mut v = DVector::<f64>::zeros(m);
    let mut a = force(0.0) - &v * c - (&stiffness * &u).component_div(&mass);
    let energy_of =
        |u: &DVector<f64>, v: &DVector<f64>| 0.5 * v.component_mul(v).dot(&mass) + 0.5 * u.dot(&(&stiffness * u));

    let mut snapshots = DMatrix::zeros(spec.nx, spec.nt);
    let mut energy = Vec::with_capacity(spec.nt * spec.substeps);
    let mut times = Vec::with_capacity(spec.nt * spec.substeps);
    let mut step = 0usize;
    for k in 0..spec.nt {
        for _ in 0..spec.substeps {
            step += 1;
            let t = step as f64 * dt;
            let u_pred = &u + &v * dt + &a * (dt * dt * (0.5 - beta));
            let v_pred = &v + &a * (dt * (1.0 - gamma));
            let rhs = (force(t) - &v_pred * c).component_mul(&mass) - &stiffness * &u_pred;
            a = chol.solve(&rhs);
            u = u_pred + &a * (beta * dt * dt);
            v = v_pred + &a * (gamma * dt);
            energy.push(energy_of(&u, &v));
            times.push(t);
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::Instability(format!(
                "beam (mu1={}, mu2={}) produced non-finite values",
                spec.mu1, spec.mu2
            )));
        }
        snapshots.view_mut((first, k), (m, 1)).copy_from(&u);
    }
    Ok(BeamOutput {
        snapshots,
        energy,
        times,
    })
}

fn second_difference(m: usize, h: f64) -> DMatrix<f64> {
    let mut d2 = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        d2[(i, i)] = -2.0 / (h * h);
        if i + 1 < m {
            d2[(i, i + 1)] = 1.0 / (h * h);
            d2[(i + 1, i)] = 1.0 / (h * h);
        }
    }
    d2
}

/// Stiffness `C^T W C` and lumped mass for nodes `1..=m`, where `C` maps
/// displacements to nodal curvatures `kappa_0..kappa_{m-1}` (ghost
/// `u_{-1} = u_1` at the clamp, zero moment at the free end) and `W` holds
/// trapezoid weights.
fn cantilever_operators(m: usize, h: f64) -> (usize, DMatrix<f64>, DVector<f64>) {
    let h2 = h * h;
    let mut curv = DMatrix::<f64>::zeros(m, m);
    curv[(0, 0)] = 2.0 / h2;
    for i in 1..m {
        // kappa_i in terms of u_{i-1}, u_i, u_{i+1}; column j holds node j + 1
        if i >= 2 {
            curv[(i, i - 2)] = 1.0 / h2;
        }
        curv[(i, i - 1)] = -2.0 / h2;
        curv[(i, i)] = 1.0 / h2;
    }
    let mut weighted = curv.clone();
    weighted.row_mut(0).scale_mut(0.5);
    let stiffness = curv.transpose() * weighted;
    let mut mass = DVector::from_element(m, 1.0);
    mass[m - 1] = 0.5;
    (1, stiffness, mass)
}

/// Runs one simulation; snapshots at `t_k = k T / nt`, `k = 1..nt`.
pub fn run_beam(spec: &BeamSpec) -> Result<SnapshotMatrix<f64>> {
    let out = simulate_beam(spec)?;
    SnapshotMatrix::new(
        out.snapshots,
        vec![spec.mu1, spec.mu2],
        format!("beam mu1={} mu2={}", spec.mu1, spec.mu2),
    )
}
