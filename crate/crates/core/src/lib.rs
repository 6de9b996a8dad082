//! Joint visual attention detection for single static scenes.
//!
//! Per-face 3D gaze directions, a metric depth map and segment proposals are
//! fused to find each face's gaze target. Targets shared by two or more faces
//! become joint-attention events, reported with participating agents and
//! template captions. A billboard-world simulator produces scenes with exact
//! ground truth for evaluation.

// `!(x > 0)` deliberately rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::should_implement_trait)]

pub mod attention;
pub mod dataset;
pub mod detect;
pub mod eval;
pub mod geometry;
pub mod overlay;
pub mod scalar;
pub mod scene;
pub mod sim;

pub use scalar::Scalar;

/// Double-precision aliases for the common case.
pub type Camera = geometry::CameraModel<f64>;
pub type Gaze = geometry::GazeVector<f64>;
pub type Face = scene::FaceObservation<f64>;
pub type Scene = scene::SceneInput<f64>;
pub type Config = detect::DetectorConfig<f64>;
pub type Detection = detect::TargetDetection<f64>;
pub type Report = attention::SceneReport<f64>;
