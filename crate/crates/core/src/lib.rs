//! Constrained gradient boosting of POD bases on the Grassmann manifold.
//!
//! The numerical core (`grassmann`, `pod`, `chart`, `cxgboost`, `baseline`) is
//! generic over [`Real`] (`f32` or `f64`). Snapshot generation, the experiment
//! harness and file formats work in `f64`.

pub mod baseline;
pub mod chart;
pub mod cxgboost;
pub mod error;
pub mod grassmann;
pub mod harness;
pub mod io;
pub mod pdelab;
pub mod pod;
pub mod scalar;

pub use baseline::{InterpModel, InterpPrediction, Scheme};
pub use chart::{build_training_chart, Chart, ReferencePolicy, TrainingChart};
pub use cxgboost::{fit, EmbeddedDataset, Ensemble, FitReport, Fitted, TrainConfig};
pub use error::{Error, Result};
pub use grassmann::{exp_map, geodesic_distance, log_map, principal_angles, HorizontalLift, PodBasis, TangentNorm};
pub use pod::{compute_pod, projection_error, PodResult, SnapshotMatrix};
pub use scalar::Real;

pub type PodBasis64 = PodBasis<f64>;
pub type PodBasis32 = PodBasis<f32>;
pub type HorizontalLift64 = HorizontalLift<f64>;
pub type Chart64 = Chart<f64>;
pub type Chart32 = Chart<f32>;
pub type Ensemble64 = Ensemble<f64>;
pub type Ensemble32 = Ensemble<f32>;
pub type Snapshots64 = SnapshotMatrix<f64>;
pub type EmbeddedDataset64 = EmbeddedDataset<f64>;
