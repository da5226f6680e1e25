//! Tangent-space interpolation of embedded POD bases.
//!
//! Training bases are embedded in the same chart as the boosted model and the
//! chart coordinates are interpolated directly: piecewise-linear for a single
//! parameter, inverse-distance weighting for several.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Predictions are pulled back radially to this distance below `pi/2`.
pub const CLIP_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Piecewise-linear in a scalar parameter, constant beyond the end nodes.
    PiecewiseLinear,
    /// Shepard weighting `|theta - theta_i|^-power` on range-normalized parameters.
    InverseDistance { power: f64 },
}

#[derive(Debug, Clone)]
pub struct InterpModel<T: Real> {
    thetas: Vec<Vec<T>>,
    ys: Vec<DVector<T>>,
    scheme: Scheme,
    /// Per-feature `(min, range)` used to normalize parameters for IDW.
    scaling: Vec<(T, T)>,
}

#[derive(Debug, Clone)]
pub struct InterpPrediction<T: Real> {
    pub y: DVector<T>,
    pub clipped: bool,
    pub extrapolated: bool,
}

impl<T: Real> InterpModel<T> {
    /// Picks piecewise-linear for one parameter and IDW (power 2) otherwise.
    pub fn new(thetas: Vec<Vec<T>>, ys: Vec<DVector<T>>) -> Result<Self> {
        let d = thetas.first().map_or(0, Vec::len);
        let scheme = if d == 1 {
            Scheme::PiecewiseLinear
        } else {
            Scheme::InverseDistance { power: 2.0 }
        };
        Self::with_scheme(thetas, ys, scheme)
    }

    pub fn with_scheme(thetas: Vec<Vec<T>>, ys: Vec<DVector<T>>, scheme: Scheme) -> Result<Self> {
        if thetas.len() != ys.len() || thetas.is_empty() {
            return Err(Error::InsufficientSamples {
                needed: 1,
                got: thetas.len().min(ys.len()),
            });
        }
        let d = thetas[0].len();
        if d == 0 || thetas.iter().any(|t| t.len() != d) {
            return Err(Error::InvalidDataset("inconsistent parameter dimensions".into()));
        }
        if matches!(scheme, Scheme::PiecewiseLinear) {
            if d != 1 {
                return Err(Error::InvalidConfig("piecewise-linear interpolation needs d = 1".into()));
            }
            if thetas.len() < 2 {
                return Err(Error::InsufficientSamples {
                    needed: 2,
                    got: thetas.len(),
                });
            }
        }
        for i in 0..thetas.len() {
            for j in (i + 1)..thetas.len() {
                if thetas[i] == thetas[j] {
                    return Err(Error::InvalidDataset(format!("samples {i} and {j} share a parameter")));
                }
            }
        }
        let scaling = (0..d)
            .map(|k| {
                let lo = thetas.iter().map(|t| t[k]).fold(thetas[0][k], |a, b| a.min(b));
                let hi = thetas.iter().map(|t| t[k]).fold(thetas[0][k], |a, b| a.max(b));
                let range = hi - lo;
                (lo, if range > T::zero() { range } else { T::one() })
            })
            .collect();
        let mut model = Self {
            thetas,
            ys,
            scheme,
            scaling,
        };
        if matches!(scheme, Scheme::PiecewiseLinear) {
            let mut order: Vec<usize> = (0..model.thetas.len()).collect();
            order.sort_by(|&a, &b| model.thetas[a][0].partial_cmp(&model.thetas[b][0]).expect("finite"));
            model.thetas = order.iter().map(|&i| model.thetas[i].clone()).collect();
            model.ys = order.iter().map(|&i| model.ys[i].clone()).collect();
        }
        Ok(model)
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn predict(&self, theta: &[T]) -> InterpPrediction<T> {
        let (y, extrapolated) = match self.scheme {
            Scheme::PiecewiseLinear => self.piecewise_linear(theta[0]),
            Scheme::InverseDistance { power } => self.inverse_distance(theta, power),
        };
        if extrapolated {
            log::warn!("interpolation query outside the training range");
        }
        let limit = T::frac_pi_2() - lit(CLIP_MARGIN);
        let norm = y.norm();
        if norm > limit {
            InterpPrediction {
                y: y * (limit / norm),
                clipped: true,
                extrapolated,
            }
        } else {
            InterpPrediction {
                y,
                clipped: false,
                extrapolated,
            }
        }
    }

    fn piecewise_linear(&self, x: T) -> (DVector<T>, bool) {
        let nodes = &self.thetas;
        let last = nodes.len() - 1;
        if x <= nodes[0][0] {
            return (self.ys[0].clone(), x < nodes[0][0]);
        }
        if x >= nodes[last][0] {
            return (self.ys[last].clone(), x > nodes[last][0]);
        }
        let hi = nodes.partition_point(|t| t[0] <= x);
        let lo = hi - 1;
        let (x0, x1) = (nodes[lo][0], nodes[hi][0]);
        if x == x0 {
            return (self.ys[lo].clone(), false);
        }
        let s = (x - x0) / (x1 - x0);
        (&self.ys[lo] * (T::one() - s) + &self.ys[hi] * s, false)
    }

    fn inverse_distance(&self, theta: &[T], power: f64) -> (DVector<T>, bool) {
        let scaled = |t: &[T]| -> Vec<T> {
            t.iter()
                .zip(&self.scaling)
                .map(|(v, (lo, range))| (*v - *lo) / *range)
                .collect()
        };
        let q = scaled(theta);
        let extrapolated = q.iter().any(|v| *v < T::zero() || *v > T::one());
        let mut weights = Vec::with_capacity(self.thetas.len());
        for (i, t) in self.thetas.iter().enumerate() {
            let p = scaled(t);
            let dist2 = p.iter().zip(&q).fold(T::zero(), |acc, (a, b)| acc + (*a - *b) * (*a - *b));
            if dist2 == T::zero() {
                return (self.ys[i].clone(), false);
            }
            weights.push(dist2.powf(lit(-power / 2.0)));
        }
        let total = weights.iter().fold(T::zero(), |a, b| a + *b);
        let mut y = DVector::zeros(self.ys[0].len());
        for (w, yi) in weights.iter().zip(&self.ys) {
            y.axpy(*w / total, yi, T::one());
        }
        (y, extrapolated)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn linear_midpoint_and_nodes() {
        let m = InterpModel::new(vec![vec![1.0], vec![0.0]], vec![v(&[0.4]), v(&[0.0])]).unwrap();
        assert_eq!(m.predict(&[0.5]).y, v(&[0.2]));
        assert_eq!(m.predict(&[1.0]).y, v(&[0.4]));
        assert_eq!(m.predict(&[0.0]).y, v(&[0.0]));
        let out = m.predict(&[3.0]);
        assert!(out.extrapolated);
        assert_eq!(out.y, v(&[0.4]));
    }

    #[test]
    fn linear_needs_two_samples() {
        assert!(matches!(
            InterpModel::new(vec![vec![0.0]], vec![v(&[0.1])]),
            Err(Error::InsufficientSamples { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn idw_reproduces_nodes_and_blends() {
        let thetas = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let ys = vec![v(&[0.0, 0.0]), v(&[0.3, 0.0]), v(&[0.0, 0.3])];
        let m = InterpModel::new(thetas, ys).unwrap();
        assert_eq!(m.predict(&[1.0, 0.0]).y, v(&[0.3, 0.0]));
        let mid = m.predict(&[0.5, 0.5]).y;
        assert!((mid[0] - mid[1]).abs() < 1e-15);
        assert!(mid[0] > 0.0 && mid[0] < 0.3);
    }

    #[test]
    fn clips_outside_ball() {
        let m = InterpModel::new(vec![vec![0.0], vec![1.0]], vec![v(&[1.6, 0.0]), v(&[1.6, 0.4])]).unwrap();
        let p = m.predict(&[0.9]);
        assert!(p.clipped);
        assert!((p.y.norm() - (std::f64::consts::FRAC_PI_2 - CLIP_MARGIN)).abs() < 1e-15);
        assert!(p.y[1] > 0.0);
    }

}
