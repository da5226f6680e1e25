//! Parameter grids and train/test labels for the generated benchmarks.

use serde::{Deserialize, Serialize};

use super::{linspace, run_beam, run_burgers, run_wave, BeamSpec, BurgersSpec, WaveSpec};
use crate::error::{Error, Result};
use crate::pod::SnapshotMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    Burgers,
    Beam,
    Wave,
    External,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Burgers => "burgers",
            Problem::Beam => "beam",
            Problem::Wave => "wave",
            Problem::External => "external",
        }
    }

    /// Parameter grid with split labels; empty for external data.
    pub fn grid(self) -> Vec<GridPoint> {
        match self {
            Problem::Burgers => burgers_grid(),
            Problem::Beam => beam_grid(),
            Problem::Wave => wave_grid(),
            Problem::External => Vec::new(),
        }
    }

    /// Runs the problem's solver at `parameter` with default settings.
    pub fn simulate(self, parameter: &[f64]) -> Result<SnapshotMatrix<f64>> {
        let [p1, p2] = parameter else {
            return Err(Error::InvalidConfig(format!(
                "{} expects two parameters, got {}",
                self.name(),
                parameter.len()
            )));
        };
        match self {
            Problem::Burgers => run_burgers(&BurgersSpec::new(*p1, *p2)),
            Problem::Beam => run_beam(&BeamSpec::new(*p1, *p2)),
            Problem::Wave => run_wave(&WaveSpec::new(*p1, *p2)),
            Problem::External => Err(Error::InvalidConfig("external data cannot be generated".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPoint {
    pub parameter: Vec<f64>,
    pub split: Split,
}

fn mod3_label(i: usize) -> Split {
    if i % 3 == 0 {
        Split::Train
    } else {
        Split::Test
    }
}

/// `a` in 6 values on `[1.0, 2.2]`, `nu` in 5 values on `[0.003, 0.010]`,
/// ordered by `a` then `nu`.
pub fn burgers_grid() -> Vec<GridPoint> {
    let mut out = Vec::with_capacity(30);
    for a in linspace(1.0, 2.2, 6) {
        for nu in linspace(0.003, 0.010, 5) {
            out.push(GridPoint {
                parameter: vec![a, nu],
                split: mod3_label(out.len()),
            });
        }
    }
    out
}

/// Odd pairs `{1,3,5,7}^2` for training, interleaved even pairs `{2,4,6}^2` for testing.
pub fn beam_grid() -> Vec<GridPoint> {
    let mut out = Vec::with_capacity(25);
    for m1 in 1..=7 {
        for m2 in 1..=7 {
            let split = match (m1 % 2, m2 % 2) {
                (1, 1) => Split::Train,
                (0, 0) => Split::Test,
                _ => continue,
            };
            out.push(GridPoint {
                parameter: vec![m1 as f64, m2 as f64],
                split,
            });
        }
    }
    out
}

/// `mu1` in `{80, 84, ..., 100}`, `mu2` in `{3.0, 3.4, ..., 5.0}`.
pub fn wave_grid() -> Vec<GridPoint> {
    let mut out = Vec::with_capacity(36);
    for m1 in linspace(80.0, 100.0, 6) {
        for m2 in linspace(3.0, 5.0, 6) {
            out.push(GridPoint {
                parameter: vec![m1, m2],
                split: mod3_label(out.len()),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(g: &[GridPoint], s: Split) -> usize {
        g.iter().filter(|p| p.split == s).count()
    }

    #[test]
    fn grid_sizes() {
        let b = burgers_grid();
        assert_eq!((b.len(), count(&b, Split::Train)), (30, 10));
        let beam = beam_grid();
        assert_eq!((beam.len(), count(&beam, Split::Train), count(&beam, Split::Test)), (25, 16, 9));
        let w = wave_grid();
        assert_eq!((w.len(), count(&w, Split::Train), count(&w, Split::Test)), (36, 12, 24));
        assert!((w[7].parameter[1] - 3.4).abs() < 1e-12);
        assert!((b[29].parameter[0] - 2.2).abs() < 1e-12);
    }
}
