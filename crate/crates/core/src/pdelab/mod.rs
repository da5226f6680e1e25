//! Deterministic snapshot generators for the benchmark problems.
//!
//! All solvers work in `f64` and produce snapshot matrices with one row per
//! spatial degree of freedom and one column per output time.

pub mod beam;
pub mod burgers;
pub mod grids;
pub mod wave;

pub use beam::{run_beam, simulate_beam, BeamOutput, BeamSpec, BeamSupport};
pub use burgers::{run_burgers, BurgersSpec};
pub use grids::{beam_grid, burgers_grid, wave_grid, GridPoint, Problem, Split};
pub use wave::{run_wave, WaveSpec};

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}
