//! Double-slit wave problem `u_tt = Laplace(u)` on the unit square.
//!
//! Explicit leapfrog on the 5-point Laplacian over a uniform node grid. The
//! slit segments on `x = 0` carry the Dirichlet signal
//! `u = mu1 sin(mu2 pi t)`; every other boundary node is homogeneous Neumann
//! via mirrored ghost values.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pod::SnapshotMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSpec {
    pub amplitude: f64,
    pub frequency: f64,
    /// Nodes per side.
    pub grid: usize,
    pub dt: f64,
    /// Number of snapshots, the first taken at `t = 0`.
    pub steps: usize,
    pub slits: [(f64, f64); 2],
}

impl WaveSpec {
    pub fn new(amplitude: f64, frequency: f64) -> Self {
        Self {
            amplitude,
            frequency,
            grid: 64,
            dt: 0.002,
            steps: 500,
            slits: [(0.25, 0.35), (0.65, 0.75)],
        }
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.grid - 1) as f64
    }

    /// Snapshot row of the node nearest to `(x, y)`.
    pub fn node_index(&self, x: f64, y: f64) -> usize {
        let g = self.grid;
        let h = self.spacing();
        let i = ((x / h).round() as usize).min(g - 1);
        let j = ((y / h).round() as usize).min(g - 1);
        i * g + j
    }

    fn on_slit(&self, y: f64) -> bool {
        const EPS: f64 = 1e-12;
        self.slits.iter().any(|(lo, hi)| y >= lo - EPS && y <= hi + EPS)
    }
}

pub fn run_wave(spec: &WaveSpec) -> Result<SnapshotMatrix<f64>> {
    let g = spec.grid;
    if g < 3 || spec.steps < 1 || !(spec.dt > 0.0) {
        return Err(Error::InvalidConfig("wave grid too small".into()));
    }
    let h = spec.spacing();
    let limit = h / std::f64::consts::SQRT_2;
    if spec.dt > limit {
        return Err(Error::Cfl { dt: spec.dt, limit });
    }
    let n = g * g;
    let idx = |i: usize, j: usize| i * g + j;
    let slit_nodes: Vec<usize> = (0..g)
        .filter(|&j| spec.on_slit(j as f64 * h))
        .map(|j| idx(0, j))
        .collect();

    let courant2 = (spec.dt / h).powi(2);
    let mut prev = vec![0.0; n];
    let mut cur = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut data = DMatrix::zeros(n, spec.steps);
    let mirror = |k: usize, step: isize| -> usize {
        // neighbour index along one axis with reflection at the walls
        let k = k as isize + step;
        if k < 0 {
            1
        } else if k >= g as isize {
            g - 2
        } else {
            k as usize
        }
    };
    let signal = |t: f64| spec.amplitude * (spec.frequency * std::f64::consts::PI * t).sin();

    for s in 1..spec.steps {
        for i in 0..g {
            let (im, ip) = (mirror(i, -1), mirror(i, 1));
            for j in 0..g {
                let (jm, jp) = (mirror(j, -1), mirror(j, 1));
                let c = cur[idx(i, j)];
                let lap = (cur[idx(ip, j)] + cur[idx(im, j)]) + (cur[idx(i, jp)] + cur[idx(i, jm)]) - 4.0 * c;
                next[idx(i, j)] = 2.0 * c - prev[idx(i, j)] + courant2 * lap;
            }
        }
        let value = signal(s as f64 * spec.dt);
        for &k in &slit_nodes {
            next[k] = value;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
        if cur.iter().any(|v| !v.is_finite()) {
            return Err(Error::Instability(format!("wave solver diverged at step {s}")));
        }
        data.set_column(s, &DVector::from_column_slice(&cur));
    }
    SnapshotMatrix::new(
        data,
        vec![spec.amplitude, spec.frequency],
        format!("wave mu1={} mu2={}", spec.amplitude, spec.frequency),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cfl_is_enforced() {
        let spec = WaveSpec {
            dt: 0.02,
            ..WaveSpec::new(90.0, 4.0)
        };
        assert!(matches!(run_wave(&spec), Err(Error::Cfl { .. })));
    }

    #[test]
    fn starts_at_rest() {
        let spec = WaveSpec {
            steps: 20,
            ..WaveSpec::new(90.0, 4.0)
        };
        let s = run_wave(&spec).unwrap();
        assert_eq!(s.data().shape(), (4096, 20));
        assert!(s.data().column(0).iter().all(|v| *v == 0.0));
        assert!(s.data().column(19).amax() > 0.0);
    }
}
