//! Scene bundle: a JSON manifest plus a binary `DMAP` depth file.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::depth::{DepthError, DepthMap};
use super::mask::{Mask, MaskError};
use super::{validate_scene, FaceObservation, PixelRect, SceneInput, SegmentProposal, Violation};
use crate::geometry::{CameraModel, GazeVector, GeometryError, Point2};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error(transparent)]
    Depth(#[from] DepthError),
    #[error("camera: {0}")]
    Camera(GeometryError),
    #[error("depth dimensions {depth_w}x{depth_h} do not match camera {cam_w}x{cam_h}")]
    DimensionMismatch {
        depth_w: u32,
        depth_h: u32,
        cam_w: u32,
        cam_h: u32,
    },
    #[error("non-positive depth {value} at pixel index {index}")]
    NonPositiveDepth { index: usize, value: f32 },
    #[error("duplicate face id {0}")]
    DuplicateFaceId(u32),
    #[error("duplicate segment id {0}")]
    DuplicateSegmentId(u32),
    #[error("face {face_id} gaze: {source}")]
    Gaze { face_id: u32, source: GeometryError },
    #[error("segment {segment_id} rle: {source}")]
    Rle { segment_id: u32, source: MaskError },
    #[error("invalid scene: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestDoc {
    scene_id: String,
    camera: CameraDoc,
    faces: Vec<FaceDoc>,
    segments: Vec<SegmentDoc>,
    depth_file: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraDoc {
    focal_px: f64,
    ppx: f64,
    ppy: f64,
    width: u32,
    height: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FaceDoc {
    face_id: u32,
    eye_x: f64,
    eye_y: f64,
    ear_px: f64,
    gx: f64,
    gy: f64,
    gz: f64,
    /// `[x_min, y_min, x_max, y_max]` in pixels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bbox: Option<[f64; 4]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentDoc {
    segment_id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    rle: Vec<[u32; 2]>,
}

/// Serialized form of a scene: manifest bytes, depth bytes, and the file
/// name the manifest uses for the depth raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneBundle {
    pub manifest: Vec<u8>,
    pub depth: Vec<u8>,
    pub depth_file: String,
}

pub fn depth_file_name(scene_id: &str) -> String {
    format!("{scene_id}.dmap")
}

/// Canonical encoding. Structurally equal scenes produce identical bytes.
pub fn serialize_scene<T: Scalar>(scene: &SceneInput<T>) -> SceneBundle {
    let f = |v: T| v.to_f64_lossy();
    let depth_file = depth_file_name(&scene.scene_id);
    let doc = ManifestDoc {
        scene_id: scene.scene_id.clone(),
        camera: CameraDoc {
            focal_px: f(scene.camera.focal_px),
            ppx: f(scene.camera.principal_point.x),
            ppy: f(scene.camera.principal_point.y),
            width: scene.camera.width,
            height: scene.camera.height,
        },
        faces: scene
            .faces
            .iter()
            .map(|face| FaceDoc {
                face_id: face.face_id,
                eye_x: f(face.eye_center_px.x),
                eye_y: f(face.eye_center_px.y),
                ear_px: f(face.ear_to_ear_px),
                gx: f(face.gaze.gx()),
                gy: f(face.gaze.gy()),
                gz: f(face.gaze.gz()),
                bbox: face.face_bbox.map(|b| [f(b.x_min), f(b.y_min), f(b.x_max), f(b.y_max)]),
            })
            .collect(),
        segments: scene
            .segments
            .iter()
            .map(|s| SegmentDoc {
                segment_id: s.segment_id,
                label: s.label.clone(),
                rle: s.mask.run_pairs(),
            })
            .collect(),
        depth_file: depth_file.clone(),
    };
    let mut manifest = serde_json::to_vec_pretty(&doc).expect("manifest serializes");
    manifest.push(b'\n');
    SceneBundle {
        manifest,
        depth: scene.depth.encode(),
        depth_file,
    }
}

/// Decodes and fully validates a scene from its manifest and depth bytes.
pub fn parse_scene<T: Scalar>(manifest: &[u8], depth: &[u8]) -> Result<SceneInput<T>, ParseError> {
    let doc: ManifestDoc = serde_json::from_slice(manifest)?;
    let depth = DepthMap::decode(depth)?;
    let t = |v: f64| T::lit(v);

    let camera = CameraModel::new(
        t(doc.camera.focal_px),
        Point2::new(t(doc.camera.ppx), t(doc.camera.ppy)),
        doc.camera.width,
        doc.camera.height,
    )
    .map_err(ParseError::Camera)?;
    if depth.width() != camera.width || depth.height() != camera.height {
        return Err(ParseError::DimensionMismatch {
            depth_w: depth.width(),
            depth_h: depth.height(),
            cam_w: camera.width,
            cam_h: camera.height,
        });
    }
    if let Some((index, &value)) = depth
        .values()
        .iter()
        .enumerate()
        .find(|(_, d)| !(d.is_finite() && **d > 0.0))
    {
        return Err(ParseError::NonPositiveDepth { index, value });
    }

    let mut seen = HashSet::new();
    let mut faces = Vec::with_capacity(doc.faces.len());
    for fd in doc.faces {
        if !seen.insert(fd.face_id) {
            return Err(ParseError::DuplicateFaceId(fd.face_id));
        }
        let gaze = GazeVector::new(t(fd.gx), t(fd.gy), t(fd.gz)).map_err(|source| ParseError::Gaze {
            face_id: fd.face_id,
            source,
        })?;
        faces.push(FaceObservation {
            face_id: fd.face_id,
            eye_center_px: Point2::new(t(fd.eye_x), t(fd.eye_y)),
            ear_to_ear_px: t(fd.ear_px),
            gaze,
            face_bbox: fd.bbox.map(|[x0, y0, x1, y1]| PixelRect {
                x_min: t(x0),
                y_min: t(y0),
                x_max: t(x1),
                y_max: t(y1),
            }),
        });
    }

    let mut seen = HashSet::new();
    let mut segments = Vec::with_capacity(doc.segments.len());
    for sd in doc.segments {
        if !seen.insert(sd.segment_id) {
            return Err(ParseError::DuplicateSegmentId(sd.segment_id));
        }
        let mask = Mask::from_runs(camera.width, camera.height, sd.rle.iter().map(|r| (r[0], r[1]))).map_err(
            |source| ParseError::Rle {
                segment_id: sd.segment_id,
                source,
            },
        )?;
        segments.push(SegmentProposal {
            segment_id: sd.segment_id,
            mask,
            label: sd.label,
        });
    }

    let scene = SceneInput {
        scene_id: doc.scene_id,
        camera,
        faces,
        depth,
        segments,
    };
    let violations = validate_scene(&scene);
    if !violations.is_empty() {
        return Err(ParseError::Invalid(violations));
    }
    Ok(scene)
}

/// Reads a manifest and the depth file it references (relative to the
/// manifest's directory).
pub fn read_scene_bundle<T: Scalar>(manifest_path: &Path) -> Result<SceneInput<T>, ParseError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ParseError::Io { path, source }
    };
    let manifest = fs::read(manifest_path).map_err(io(manifest_path))?;

    #[derive(Deserialize)]
    struct DepthRef {
        depth_file: String,
    }
    let r: DepthRef = serde_json::from_slice(&manifest)?;
    let depth_path = manifest_path.parent().unwrap_or(Path::new(".")).join(&r.depth_file);
    let depth = fs::read(&depth_path).map_err(io(&depth_path))?;
    parse_scene(&manifest, &depth)
}

/// Writes `<scene_id>.json` and `<scene_id>.dmap` into `dir`, each through a
/// temporary file and rename. Returns the manifest path.
pub fn write_scene_bundle<T: Scalar>(dir: &Path, scene: &SceneInput<T>) -> std::io::Result<PathBuf> {
    let bundle = serialize_scene(scene);
    write_atomic(&dir.join(&bundle.depth_file), &bundle.depth)?;
    let manifest_path = dir.join(format!("{}.json", scene.scene_id));
    write_atomic(&manifest_path, &bundle.manifest)?;
    Ok(manifest_path)
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}
