//! Per-face gaze target selection.
//!
//! Candidates are the segments crossed by the face's projected gaze ray. In
//! 3D mode a candidate matches when its mean region depth agrees with the
//! depth of the 3D gaze ray at the crossing; the nearest match wins. The 2D
//! variant ignores depth and takes the nearest crossing.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    gaze_projection_2d, pixel_scale_with_face_width, ray_depth_at_pixel, GeometryError, Point2, FACE_WIDTH_M,
};
use crate::scalar::Scalar;
use crate::scene::{region_mean_depth, trace_ray_hits, FaceObservation, Pixel, SceneInput};

pub const DEFAULT_DEPTH_TOLERANCE_M: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[serde(rename = "3d")]
    ThreeD,
    #[serde(rename = "2d")]
    TwoD,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::ThreeD => "3d",
            Mode::TwoD => "2d",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "3d" => Ok(Mode::ThreeD),
            "2d" => Ok(Mode::TwoD),
            other => Err(format!("unknown mode '{other}', expected 3d or 2d")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DetectorConfig<T: Scalar> {
    pub depth_tolerance_m: T,
    pub mode: Mode,
    pub face_width_m: T,
}

impl<T: Scalar> Default for DetectorConfig<T> {
    fn default() -> Self {
        Self {
            depth_tolerance_m: T::lit(DEFAULT_DEPTH_TOLERANCE_M),
            mode: Mode::ThreeD,
            face_width_m: T::lit(FACE_WIDTH_M),
        }
    }
}

impl<T: Scalar> DetectorConfig<T> {
    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_tolerance(mut self, tol: T) -> Self {
        self.depth_tolerance_m = tol;
        self
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if !(self.depth_tolerance_m > T::zero()) {
            return Err(ConfigError::Tolerance(self.depth_tolerance_m.to_f64_lossy()));
        }
        if !(self.face_width_m > T::zero() && self.face_width_m.is_finite()) {
            return Err(ConfigError::FaceWidth(self.face_width_m.to_f64_lossy()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("depth tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("face width must be positive, got {0}")]
    FaceWidth(f64),
}

/// A segment crossed by the projected gaze, with both depth estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Candidate<T: Scalar> {
    pub segment_id: u32,
    pub hit_px: Pixel,
    pub pixel_distance: T,
    /// Depth of the 3D gaze ray at the hit pixel. Non-positive when the ray
    /// heads toward the camera far enough to pass the image plane.
    pub ray_depth_m: T,
    pub region_depth_m: T,
    pub depth_residual_m: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoTargetReason {
    DegenerateGaze,
    NoIntersections,
    NoDepthMatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", tag = "kind", rename_all = "snake_case")]
pub enum Outcome<T: Scalar> {
    Target(Candidate<T>),
    NoTarget { reason: NoTargetReason },
}

impl<T: Scalar> Outcome<T> {
    pub fn target_segment(&self) -> Option<u32> {
        match self {
            Outcome::Target(c) => Some(c.segment_id),
            Outcome::NoTarget { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TargetDetection<T: Scalar> {
    pub face_id: u32,
    pub outcome: Outcome<T>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectError {
    #[error("gaze projects onto the optical axis")]
    DegenerateGaze,
    #[error("face {0}: {1}")]
    Face(u32, GeometryError),
    #[error("face {0}: no usable face depth")]
    FaceDepth(u32),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Face depth: the depth value at the eye pixel, falling back to the mean
/// over the face box when that value is not finite.
pub fn face_depth<T: Scalar>(scene: &SceneInput<T>, face: &FaceObservation<T>) -> Option<T> {
    let (w, h) = (scene.camera.width, scene.camera.height);
    let at_eye = face.eye_pixel(w, h).and_then(|p| scene.depth.get(p));
    if let Some(d) = at_eye.filter(|d| d.is_finite() && *d > 0.0) {
        return Some(T::lit(d as f64));
    }
    let bbox = face.face_bbox?;
    let vals: Vec<f64> = bbox
        .pixels(w, h)
        .filter_map(|p| scene.depth.get(p))
        .filter(|d| d.is_finite() && *d > 0.0)
        .map(f64::from)
        .collect();
    (!vals.is_empty()).then(|| T::lit(vals.iter().sum::<f64>() / vals.len() as f64))
}

/// All segments crossed by the face's projected gaze, sorted by pixel distance.
pub fn enumerate_candidates<T: Scalar>(
    scene: &SceneInput<T>,
    face: &FaceObservation<T>,
    config: &DetectorConfig<T>,
) -> Result<Vec<Candidate<T>>, DetectError> {
    config.check()?;
    let dir = gaze_projection_2d(&face.gaze)
        .direction()
        .ok_or(DetectError::DegenerateGaze)?;
    let scale = pixel_scale_with_face_width(face.ear_to_ear_px, config.face_width_m)
        .map_err(|e| DetectError::Face(face.face_id, e))?;
    let z0 = face_depth(scene, face).ok_or(DetectError::FaceDepth(face.face_id))?;

    let mut out = Vec::new();
    for hit in trace_ray_hits(scene, face.eye_center_px, dir) {
        let Some(segment) = scene.segment(hit.segment_id) else {
            continue;
        };
        let point = Point2::new(T::lit(hit.hit_px.x as f64), T::lit(hit.hit_px.y as f64));
        let ray_depth = ray_depth_at_pixel(face.eye_center_px, z0, &face.gaze, scale, point)
            .map_err(|e| DetectError::Face(face.face_id, e))?;
        let region_depth: T = region_mean_depth(&scene.depth, segment)
            .expect("validated segments are non-empty and match the raster");
        out.push(Candidate {
            segment_id: hit.segment_id,
            hit_px: hit.hit_px,
            pixel_distance: hit.pixel_distance,
            ray_depth_m: ray_depth,
            region_depth_m: region_depth,
            depth_residual_m: (region_depth - ray_depth).abs(),
        });
    }
    Ok(out)
}

fn nearest_first<T: Scalar>(a: &Candidate<T>, b: &Candidate<T>) -> Ordering {
    a.pixel_distance
        .partial_cmp(&b.pixel_distance)
        .unwrap_or(Ordering::Equal)
        .then(
            a.depth_residual_m
                .partial_cmp(&b.depth_residual_m)
                .unwrap_or(Ordering::Equal),
        )
        .then(a.segment_id.cmp(&b.segment_id))
}

fn no_target<T: Scalar>(face_id: u32, reason: NoTargetReason) -> TargetDetection<T> {
    TargetDetection {
        face_id,
        outcome: Outcome::NoTarget { reason },
    }
}

fn candidates_or_reason<T: Scalar>(
    scene: &SceneInput<T>,
    face: &FaceObservation<T>,
    config: &DetectorConfig<T>,
) -> Result<Result<Vec<Candidate<T>>, NoTargetReason>, DetectError> {
    match enumerate_candidates(scene, face, config) {
        Err(DetectError::DegenerateGaze) => Ok(Err(NoTargetReason::DegenerateGaze)),
        Err(e) => Err(e),
        Ok(c) if c.is_empty() => Ok(Err(NoTargetReason::NoIntersections)),
        Ok(c) => Ok(Ok(c)),
    }
}

/// Nearest candidate whose depth residual is within tolerance.
pub fn detect_target_3d<T: Scalar>(
    scene: &SceneInput<T>,
    face: &FaceObservation<T>,
    config: &DetectorConfig<T>,
) -> Result<TargetDetection<T>, DetectError> {
    let candidates = match candidates_or_reason(scene, face, config)? {
        Ok(c) => c,
        Err(reason) => return Ok(no_target(face.face_id, reason)),
    };
    let best = candidates
        .into_iter()
        .filter(|c| c.depth_residual_m <= config.depth_tolerance_m)
        .min_by(nearest_first);
    Ok(match best {
        Some(c) => TargetDetection {
            face_id: face.face_id,
            outcome: Outcome::Target(c),
        },
        None => no_target(face.face_id, NoTargetReason::NoDepthMatch),
    })
}

/// Nearest candidate along the projected gaze, ignoring depth.
pub fn detect_target_2d<T: Scalar>(
    scene: &SceneInput<T>,
    face: &FaceObservation<T>,
    config: &DetectorConfig<T>,
) -> Result<TargetDetection<T>, DetectError> {
    let candidates = match candidates_or_reason(scene, face, config)? {
        Ok(c) => c,
        Err(reason) => return Ok(no_target(face.face_id, reason)),
    };
    let best = candidates
        .into_iter()
        .min_by(|a, b| {
            a.pixel_distance
                .partial_cmp(&b.pixel_distance)
                .unwrap_or(Ordering::Equal)
                .then(a.segment_id.cmp(&b.segment_id))
        })
        .expect("non-empty");
    Ok(TargetDetection {
        face_id: face.face_id,
        outcome: Outcome::Target(best),
    })
}

/// Dispatches on `config.mode`.
pub fn detect_target<T: Scalar>(
    scene: &SceneInput<T>,
    face: &FaceObservation<T>,
    config: &DetectorConfig<T>,
) -> Result<TargetDetection<T>, DetectError> {
    match config.mode {
        Mode::ThreeD => detect_target_3d(scene, face, config),
        Mode::TwoD => detect_target_2d(scene, face, config),
    }
}
