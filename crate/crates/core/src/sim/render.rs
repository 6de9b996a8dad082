use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use super::{GroundTruth, TargetRef, TruthEvent, WorldSpec, FACE_HEIGHT_RATIO, FACE_SEGMENT_BASE};
use crate::geometry::{project_world_point, GazeVector, Point3};
use crate::scene::{DepthMap, FaceObservation, Mask, PixelRect, SceneInput, SegmentProposal};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("invalid world: {0}")]
    InvalidWorld(String),
    #[error("agent {0}: eye center is hidden behind another billboard")]
    FaceHidden(u32),
    #[error("agent {agent}: line of sight occluded by segment {by}")]
    Occluded { agent: u32, by: u32 },
    #[error("agent {agent}: target {object} center is not visible to the camera")]
    TargetHidden { agent: u32, object: u32 },
}

/// A rectangle in the plane `z = depth`, spanning `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Billboard {
    pub segment_id: u32,
    pub label: String,
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub depth: f64,
}

impl Billboard {
    fn centered(segment_id: u32, label: String, c: [f64; 3], w: f64, h: f64) -> Self {
        Self {
            segment_id,
            label,
            x0: c[0] - w / 2.0,
            x1: c[0] + w / 2.0,
            y0: c[1] - h / 2.0,
            y1: c[1] + h / 2.0,
            depth: c[2],
        }
    }

    fn contains_xy(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// Projected pixel extent: pixels with centers in `[u0, u1) × [v0, v1)`.
    fn pixel_bounds(&self, world: &WorldSpec) -> (f64, f64, f64, f64) {
        let cam = &world.camera;
        let f = cam.focal_px / self.depth;
        (
            cam.principal_point.x + f * self.x0,
            cam.principal_point.x + f * self.x1,
            cam.principal_point.y + f * self.y0,
            cam.principal_point.y + f * self.y1,
        )
    }

    /// Whether the open segment from `a` to `b` passes through this rectangle.
    fn blocks(&self, a: Point3<f64>, b: Point3<f64>) -> bool {
        let dz = b.z - a.z;
        if dz.abs() < 1e-12 {
            if (a.z - self.depth).abs() > 1e-12 {
                return false;
            }
            // coplanar: sample the segment
            return (1..64).any(|k| {
                let t = k as f64 / 64.0;
                self.contains_xy(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
            });
        }
        let t = (self.depth - a.z) / dz;
        if t <= 0.0 || t >= 1.0 {
            return false;
        }
        self.contains_xy(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
    }
}

/// All billboards of a world: objects first, then one head per agent.
pub fn billboards(world: &WorldSpec) -> Vec<Billboard> {
    let fw = world.face_width_m;
    world
        .objects
        .iter()
        .map(|o| Billboard::centered(o.object_id, o.label.clone(), o.center, o.width_m, o.height_m))
        .chain(world.agents.iter().map(|a| {
            Billboard::centered(
                FACE_SEGMENT_BASE + a.agent_id,
                format!("person {}", a.agent_id),
                a.head_center,
                fw,
                fw * FACE_HEIGHT_RATIO,
            )
        }))
        .collect()
}

fn validate_world(world: &WorldSpec) -> Result<(), RenderError> {
    let bad = |m: String| Err(RenderError::InvalidWorld(m));
    if let Err(e) = world.camera.check() {
        return bad(e.to_string());
    }
    if !(world.background_depth_m > 0.0 && world.background_depth_m.is_finite()) {
        return bad("background depth must be positive".into());
    }
    if !(world.face_width_m > 0.0) {
        return bad("face width must be positive".into());
    }
    let mut ids = HashSet::new();
    for o in &world.objects {
        if o.object_id == 0 || o.object_id >= FACE_SEGMENT_BASE || !ids.insert(o.object_id) {
            return bad(format!("object id {} must be unique and in 1..{FACE_SEGMENT_BASE}", o.object_id));
        }
        if !(o.width_m > 0.0 && o.height_m > 0.0) {
            return bad(format!("object {} has non-positive size", o.object_id));
        }
        if !(o.center[2] > 0.0 && o.center[2] < world.background_depth_m) {
            return bad(format!("object {} depth must lie in (0, background)", o.object_id));
        }
    }
    let mut ids = HashSet::new();
    for a in &world.agents {
        if !ids.insert(a.agent_id) || a.agent_id >= FACE_SEGMENT_BASE {
            return bad(format!("agent id {} must be unique and below {FACE_SEGMENT_BASE}", a.agent_id));
        }
        if !(a.head_center[2] > 0.0 && a.head_center[2] < world.background_depth_m) {
            return bad(format!("agent {} depth must lie in (0, background)", a.agent_id));
        }
        match a.target {
            TargetRef::Object(id) if world.object(id).is_none() => {
                return bad(format!("agent {} targets unknown object {id}", a.agent_id))
            }
            TargetRef::Free(d) if GazeVector::normalized(d[0], d[1], d[2]).is_none() => {
                return bad(format!("agent {} has a zero free-gaze direction", a.agent_id))
            }
            _ => {}
        }
    }
    let (w, h) = (world.camera.width as f64, world.camera.height as f64);
    for b in billboards(world) {
        let (u0, u1, v0, v1) = b.pixel_bounds(world);
        if u0 < -0.5 || v0 < -0.5 || u1 > w - 0.5 || v1 > h - 0.5 {
            return bad(format!("billboard {} projects outside the image", b.segment_id));
        }
    }
    Ok(())
}

/// Renders a world into detector inputs and the ground truth they induce.
///
/// Depth is a z-buffer over billboards (nearest wins, earlier billboard on
/// ties), with `background_depth_m` elsewhere. Each billboard's visible
/// pixels form one segment proposal.
pub fn render_world(world: &WorldSpec) -> Result<(SceneInput<f64>, GroundTruth), RenderError> {
    validate_world(world)?;
    let cam = &world.camera;
    let (w, h) = (cam.width, cam.height);
    let boards = billboards(world);

    let mut depth = vec![world.background_depth_m; (w * h) as usize];
    let mut owner: Vec<i32> = vec![-1; (w * h) as usize];
    for (k, b) in boards.iter().enumerate() {
        let (u0, u1, v0, v1) = b.pixel_bounds(world);
        let (i0, i1) = (u0.ceil().max(0.0) as u32, (u1.ceil() as i64).clamp(0, w as i64) as u32);
        let (j0, j1) = (v0.ceil().max(0.0) as u32, (v1.ceil() as i64).clamp(0, h as i64) as u32);
        for j in j0..j1 {
            for i in i0..i1 {
                let idx = (j * w + i) as usize;
                if b.depth < depth[idx] {
                    depth[idx] = b.depth;
                    owner[idx] = k as i32;
                }
            }
        }
    }

    let mut visible: Vec<Vec<u32>> = vec![Vec::new(); boards.len()];
    for (idx, &o) in owner.iter().enumerate() {
        if o >= 0 {
            visible[o as usize].push(idx as u32);
        }
    }
    let segments: Vec<SegmentProposal> = boards
        .iter()
        .zip(visible)
        .filter(|(_, px)| !px.is_empty())
        .map(|(b, px)| SegmentProposal {
            segment_id: b.segment_id,
            mask: Mask::from_indices(w, h, px),
            label: Some(b.label.clone()),
        })
        .collect();

    let n_objects = world.objects.len();
    let mut faces = Vec::with_capacity(world.agents.len());
    for (ai, a) in world.agents.iter().enumerate() {
        let head = Point3::new(a.head_center[0], a.head_center[1], a.head_center[2]);
        let eye = project_world_point(cam, head).map_err(|e| RenderError::InvalidWorld(e.to_string()))?;
        let eye_idx = (eye.y.round() as u32) * w + eye.x.round() as u32;
        if owner[eye_idx as usize] != (n_objects + ai) as i32 {
            return Err(RenderError::FaceHidden(a.agent_id));
        }
        let gaze = match a.target {
            TargetRef::Object(id) => {
                let o = world.object(id).expect("validated");
                let t = Point3::new(o.center[0], o.center[1], o.center[2]);
                for (k, b) in boards.iter().enumerate() {
                    if k == n_objects + ai || b.segment_id == id {
                        continue;
                    }
                    if b.blocks(head, t) {
                        return Err(RenderError::Occluded {
                            agent: a.agent_id,
                            by: b.segment_id,
                        });
                    }
                }
                let c = project_world_point(cam, t).map_err(|e| RenderError::InvalidWorld(e.to_string()))?;
                let c_idx = (c.y.round() as u32) * w + c.x.round() as u32;
                let ok = owner[c_idx as usize] >= 0 && boards[owner[c_idx as usize] as usize].segment_id == id;
                if !ok {
                    return Err(RenderError::TargetHidden {
                        agent: a.agent_id,
                        object: id,
                    });
                }
                GazeVector::from_point(t.sub(head))
            }
            TargetRef::Free(d) => GazeVector::normalized(d[0], d[1], d[2]),
        }
        .ok_or_else(|| RenderError::InvalidWorld(format!("agent {} gaze is degenerate", a.agent_id)))?;

        let fb = &boards[n_objects + ai];
        let (u0, u1, v0, v1) = fb.pixel_bounds(world);
        faces.push(FaceObservation {
            face_id: a.agent_id,
            eye_center_px: eye,
            ear_to_ear_px: cam.focal_px * world.face_width_m / head.z,
            gaze,
            face_bbox: Some(PixelRect {
                x_min: u0,
                y_min: v0,
                x_max: u1,
                y_max: v1,
            }),
        });
    }

    let depth = DepthMap::new(w, h, depth.into_iter().map(|d| d as f32).collect()).expect("sized raster");
    let scene = SceneInput {
        scene_id: "world".into(),
        camera: *cam,
        faces,
        depth,
        segments,
    };

    let targets: BTreeMap<u32, Option<u32>> = world
        .agents
        .iter()
        .map(|a| {
            let t = match a.target {
                TargetRef::Object(id) => Some(id),
                TargetRef::Free(_) => None,
            };
            (a.agent_id, t)
        })
        .collect();
    let mut groups: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for (&agent, t) in &targets {
        if let Some(o) = t {
            groups.entry(*o).or_default().insert(agent);
        }
    }
    let masks = groups
        .keys()
        .filter_map(|&o| scene.segment(o).map(|s| (o, s.mask.clone())))
        .collect();
    let events = groups
        .into_iter()
        .filter(|(_, p)| p.len() >= 2)
        .map(|(object_id, participants)| TruthEvent {
            object_id,
            segment_id: object_id,
            participants,
        })
        .collect();
    Ok((
        scene,
        GroundTruth {
            targets,
            events,
            masks,
        },
    ))
}
