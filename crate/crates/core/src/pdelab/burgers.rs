//! Viscous Burgers equation `u_t + u u_x = nu u_xx` on the periodic unit interval.
//!
//! Space: flux-form finite differences with the skew-symmetric numerical flux
//! `F(a, b) = (a^2 + a b + b^2) / 6` (consistent with `u^2 / 2`; conserves the
//! mean exactly and the discrete energy in the inviscid limit). Time: Heun
//! predictor-corrector for advection with Crank-Nicolson diffusion, substepped
//! to respect an advective CFL bound.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pod::SnapshotMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurgersSpec {
    pub amplitude: f64,
    pub viscosity: f64,
    pub nx: usize,
    pub nt: usize,
    pub t_final: f64,
    /// Advective Courant number bound for the inner time step.
    pub cfl: f64,
}

impl BurgersSpec {
    pub fn new(amplitude: f64, viscosity: f64) -> Self {
        Self {
            amplitude,
            viscosity,
            nx: 256,
            nt: 101,
            t_final: 1.0,
            cfl: 0.4,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.viscosity > 0.0) || !(self.amplitude >= 0.0) {
            return Err(Error::InvalidConfig("Burgers needs nu > 0 and a >= 0".into()));
        }
        if self.nx < 3 || self.nt < 2 || !(self.t_final > 0.0) || !(self.cfl > 0.0) {
            return Err(Error::InvalidConfig("Burgers grid too small".into()));
        }
        Ok(())
    }
}

fn advection(u: &[f64], h: f64, out: &mut [f64]) {
    let n = u.len();
    let flux = |a: f64, b: f64| (a * a + a * b + b * b) / 6.0;
    for j in 0..n {
        let left = u[(j + n - 1) % n];
        let right = u[(j + 1) % n];
        out[j] = (flux(u[j], right) - flux(left, u[j])) / h;
    }
}

fn laplacian(u: &[f64], h2: f64, out: &mut [f64]) {
    let n = u.len();
    for j in 0..n {
        out[j] = (u[(j + n - 1) % n] - 2.0 * u[j] + u[(j + 1) % n]) / h2;
    }
}

/// Solves `(1 + 2c) x_j - c (x_{j-1} + x_{j+1}) = rhs_j` with periodic wrap
/// (Sherman-Morrison on top of the Thomas algorithm).
fn solve_periodic(c: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let diag = 1.0 + 2.0 * c;
    let off = -c;
    // A = T + w v^T with corner terms folded in; gamma chosen as -diag.
    let gamma = -diag;
    let mut main = vec![diag; n];
    main[0] = diag - gamma;
    main[n - 1] = diag - off * off / gamma;
    let thomas = |d: &[f64]| -> Vec<f64> {
        let mut cp = vec![0.0; n];
        let mut dp = vec![0.0; n];
        cp[0] = off / main[0];
        dp[0] = d[0] / main[0];
        for i in 1..n {
            let m = main[i] - off * cp[i - 1];
            cp[i] = off / m;
            dp[i] = (d[i] - off * dp[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = dp[i] - cp[i] * x[i + 1];
        }
        x
    };
    let y = thomas(rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = off;
    let z = thomas(&u);
    let v0 = 1.0;
    let vn = off / gamma;
    let fact = (v0 * y[0] + vn * y[n - 1]) / (1.0 + v0 * z[0] + vn * z[n - 1]);
    y.iter().zip(&z).map(|(a, b)| a - fact * b).collect()
}

/// Runs one simulation and returns the `nx x nt` snapshot matrix, including
/// `t = 0` and `t = t_final`.
pub fn run_burgers(spec: &BurgersSpec) -> Result<SnapshotMatrix<f64>> {
    spec.validate()?;
    let n = spec.nx;
    let h = 1.0 / n as f64;
    let h2 = h * h;
    let interval = spec.t_final / (spec.nt - 1) as f64;
    let umax = spec.amplitude.max(1e-12);
    let dt_max = spec.cfl * h / umax;
    let substeps = (interval / dt_max).ceil().max(1.0) as usize;
    let dt = interval / substeps as f64;
    let c = 0.5 * spec.viscosity * dt / h2;

    let mut u: Vec<f64> = (0..n)
        .map(|j| spec.amplitude * (2.0 * std::f64::consts::PI * j as f64 * h).sin())
        .collect();
    let mut data = DMatrix::zeros(n, spec.nt);
    data.set_column(0, &nalgebra::DVector::from_column_slice(&u));

    let mut adv0 = vec![0.0; n];
    let mut adv1 = vec![0.0; n];
    let mut lap = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let blowup = 10.0 * umax + 1.0;
    for k in 1..spec.nt {
        for _ in 0..substeps {
            advection(&u, h, &mut adv0);
            laplacian(&u, h2, &mut lap);
            for j in 0..n {
                rhs[j] = u[j] - dt * adv0[j] + c * h2 * lap[j];
            }
            let predictor = solve_periodic(c, &rhs);
            advection(&predictor, h, &mut adv1);
            for j in 0..n {
                rhs[j] = u[j] - 0.5 * dt * (adv0[j] + adv1[j]) + c * h2 * lap[j];
            }
            u = solve_periodic(c, &rhs);
        }
        if u.iter().any(|v| !v.is_finite() || v.abs() > blowup) {
            return Err(Error::Instability(format!(
                "Burgers (a={}, nu={}) diverged before t={}",
                spec.amplitude,
                spec.viscosity,
                k as f64 * interval
            )));
        }
        data.set_column(k, &nalgebra::DVector::from_column_slice(&u));
    }
    SnapshotMatrix::new(
        data,
        vec![spec.amplitude, spec.viscosity],
        format!("burgers a={} nu={}", spec.amplitude, spec.viscosity),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_solver_matches_dense() {
        let rhs: Vec<f64> = (0..7).map(|i| (i as f64 * 0.7).sin()).collect();
        let c = 0.3;
        let x = solve_periodic(c, &rhs);
        for j in 0..7 {
            let lhs = (1.0 + 2.0 * c) * x[j] - c * (x[(j + 6) % 7] + x[(j + 1) % 7]);
            assert!((lhs - rhs[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_amplitude_stays_zero() {
        let s = run_burgers(&BurgersSpec::new(0.0, 0.01)).unwrap();
        assert_eq!(s.data().shape(), (256, 101));
        assert!(s.data().amax() < 1e-12);
    }

    #[test]
    fn rejects_bad_viscosity() {
        assert!(run_burgers(&BurgersSpec::new(1.0, 0.0)).is_err());
    }
}
