//! Scene data model: faces, depth raster and segment proposals, plus
//! validation and region statistics.

mod depth;
mod format;
mod mask;
mod trace;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{CameraModel, GazeVector, Point2};
use crate::scalar::Scalar;

pub use depth::{DepthError, DepthMap, DEPTH_MAGIC};
pub use format::{
    depth_file_name, parse_scene, read_scene_bundle, serialize_scene, write_scene_bundle, ParseError, SceneBundle,
};
pub use mask::{Mask, MaskError, Pixel, Run};
pub(crate) use format::write_atomic;
pub use trace::{
    corridor_scan, trace_ray_hits, trace_ray_hits_exhaustive, CorridorPixel, RayHit, CORRIDOR_HALF_WIDTH_PX,
};

/// Axis-aligned pixel rectangle, inclusive of both corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PixelRect<T: Scalar> {
    pub x_min: T,
    pub y_min: T,
    pub x_max: T,
    pub y_max: T,
}

impl<T: Scalar> PixelRect<T> {
    /// Pixels whose centers fall inside the rectangle, clipped to the raster.
    pub fn pixels(&self, width: u32, height: u32) -> impl Iterator<Item = Pixel> {
        let clip = |v: T, hi: u32| v.ceil().max(T::zero()).min(T::lit(hi as f64)).to_u32().unwrap_or(0);
        let clip_hi = |v: T, hi: u32| {
            let f = v.floor();
            if f < T::zero() {
                None
            } else {
                Some(f.min(T::lit(hi as f64 - 1.0)).to_u32().unwrap_or(0))
            }
        };
        let (x0, y0) = (clip(self.x_min, width), clip(self.y_min, height));
        let (x1, y1) = (clip_hi(self.x_max, width), clip_hi(self.y_max, height));
        let ys = match y1 {
            Some(y1) if y0 <= y1 => y0..y1 + 1,
            _ => 0..0,
        };
        let xs = match x1 {
            Some(x1) if x0 <= x1 => x0..x1 + 1,
            _ => 0..0,
        };
        ys.flat_map(move |y| xs.clone().map(move |x| Pixel::new(x, y)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FaceObservation<T: Scalar> {
    pub face_id: u32,
    /// Gaze origin: the point between the eyes.
    pub eye_center_px: Point2<T>,
    pub ear_to_ear_px: T,
    pub gaze: GazeVector<T>,
    pub face_bbox: Option<PixelRect<T>>,
}

impl<T: Scalar> FaceObservation<T> {
    /// Pixel containing the eye center, if inside the raster.
    pub fn eye_pixel(&self, width: u32, height: u32) -> Option<Pixel> {
        round_pixel(self.eye_center_px, width, height)
    }
}

pub(crate) fn round_pixel<T: Scalar>(p: Point2<T>, width: u32, height: u32) -> Option<Pixel> {
    let x = p.x.round();
    let y = p.y.round();
    if x < T::zero() || y < T::zero() || x >= T::lit(width as f64) || y >= T::lit(height as f64) {
        return None;
    }
    Some(Pixel::new(x.to_u32()?, y.to_u32()?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentProposal {
    pub segment_id: u32,
    pub mask: Mask,
    /// Object name used in captions.
    pub label: Option<String>,
}

/// One scene's fused perception inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneInput<T: Scalar> {
    pub scene_id: String,
    pub camera: CameraModel<T>,
    pub faces: Vec<FaceObservation<T>>,
    pub depth: DepthMap,
    pub segments: Vec<SegmentProposal>,
}

impl<T: Scalar> SceneInput<T> {
    pub fn face(&self, face_id: u32) -> Option<&FaceObservation<T>> {
        self.faces.iter().find(|f| f.face_id == face_id)
    }

    pub fn segment(&self, segment_id: u32) -> Option<&SegmentProposal> {
        self.segments.iter().find(|s| s.segment_id == segment_id)
    }

    /// Converts every scalar field to another float type.
    pub fn cast<U: Scalar>(&self) -> SceneInput<U> {
        let c = |v: T| U::lit(v.to_f64_lossy());
        SceneInput {
            scene_id: self.scene_id.clone(),
            camera: self.camera.cast(),
            faces: self
                .faces
                .iter()
                .map(|f| FaceObservation {
                    face_id: f.face_id,
                    eye_center_px: Point2::new(c(f.eye_center_px.x), c(f.eye_center_px.y)),
                    ear_to_ear_px: c(f.ear_to_ear_px),
                    gaze: f.gaze.cast(),
                    face_bbox: f.face_bbox.map(|b| PixelRect {
                        x_min: c(b.x_min),
                        y_min: c(b.y_min),
                        x_max: c(b.x_max),
                        y_max: c(b.y_max),
                    }),
                })
                .collect(),
            depth: self.depth.clone(),
            segments: self.segments.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

/// Checks every scene invariant; an empty list means the scene is valid.
pub fn validate_scene<T: Scalar>(scene: &SceneInput<T>) -> Vec<Violation> {
    let mut v = Vec::new();
    let cam = &scene.camera;
    if scene.scene_id.is_empty()
        || !scene
            .scene_id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        || scene.scene_id.starts_with('.')
    {
        v.push(Violation::new("scene_id", "must be non-empty [A-Za-z0-9_.-], not starting with '.'"));
    }
    if let Err(e) = cam.check() {
        v.push(Violation::new("camera", e.to_string()));
    }
    if scene.depth.width() != cam.width || scene.depth.height() != cam.height {
        v.push(Violation::new(
            "depth",
            format!(
                "dimensions {}x{} differ from camera {}x{}",
                scene.depth.width(),
                scene.depth.height(),
                cam.width,
                cam.height
            ),
        ));
    }
    if let Some((i, d)) = scene
        .depth
        .values()
        .iter()
        .enumerate()
        .find(|(_, d)| !(d.is_finite() && **d > 0.0))
    {
        v.push(Violation::new(format!("depth[{i}]"), format!("must be positive and finite, got {d}")));
    }

    if scene.faces.is_empty() {
        v.push(Violation::new("faces", "at least one face required"));
    }
    let mut face_ids = HashSet::new();
    for (i, f) in scene.faces.iter().enumerate() {
        let field = |name: &str| format!("faces[{i}].{name}");
        if !face_ids.insert(f.face_id) {
            v.push(Violation::new(field("face_id"), format!("duplicate face id {}", f.face_id)));
        }
        if !cam.contains(f.eye_center_px) {
            v.push(Violation::new(field("eye_center_px"), "outside image bounds"));
        }
        if !(f.ear_to_ear_px > T::zero() && f.ear_to_ear_px.is_finite()) {
            v.push(Violation::new(field("ear_to_ear_px"), "must be positive"));
        }
        if GazeVector::new(f.gaze.gx(), f.gaze.gy(), f.gaze.gz()).is_err() {
            v.push(Violation::new(field("gaze"), "must be unit length"));
        }
        if let Some(b) = f.face_bbox {
            if !(b.x_min <= b.x_max && b.y_min <= b.y_max) {
                v.push(Violation::new(field("face_bbox"), "min corner exceeds max corner"));
            }
        }
    }

    let mut seg_ids = HashSet::new();
    for (i, s) in scene.segments.iter().enumerate() {
        let field = |name: &str| format!("segments[{i}].{name}");
        if !seg_ids.insert(s.segment_id) {
            v.push(Violation::new(field("segment_id"), format!("duplicate segment id {}", s.segment_id)));
        }
        if s.mask.is_empty() {
            v.push(Violation::new(field("mask"), "must be non-empty"));
        }
        if s.mask.width() != cam.width || s.mask.height() != cam.height {
            v.push(Violation::new(field("mask"), "raster dimensions differ from camera"));
        }
    }
    v
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("empty mask")]
    EmptyMask,
    #[error("mask raster does not match depth raster")]
    DimensionMismatch,
}

/// Arithmetic mean of the depth values under a segment's mask.
pub fn region_mean_depth<T: Scalar>(depth: &DepthMap, segment: &SegmentProposal) -> Result<T, RegionError> {
    if segment.mask.is_empty() {
        return Err(RegionError::EmptyMask);
    }
    depth
        .mean_over(&segment.mask)
        .map(T::lit)
        .ok_or(RegionError::DimensionMismatch)
}
