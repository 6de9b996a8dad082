use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    default_camera, render_world, AgentSpec, GroundTruth, ObjectSpec, SimError, TargetRef, WorldSpec, DISTRACTOR_LABEL,
};
use crate::detect::face_depth;
use crate::geometry::{
    back_project, gaze_projection_2d, pixel_scale_with_face_width, ray_depth_at_pixel, Point2, FACE_WIDTH_M,
};
use crate::scene::{corridor_scan, region_mean_depth, trace_ray_hits, FaceObservation, SceneInput};

const LABELS: [&str; 12] = [
    "cup", "ball", "book", "cake", "lamp", "plant", "phone", "clock", "vase", "kite", "hat", "bowl",
];
const BACKGROUND_DEPTH_M: f64 = 10.0;
/// Distractor placements tried per scene before resampling the layout.
const DISTRACTOR_TRIES: usize = 20;

/// Margins that keep a noiseless scene inside the detector's reliable
/// range. Residuals use the same heuristic depth-along-ray the detector
/// uses, so scenes near the tolerance boundary are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    /// Minimum of max(|gx|, |gy|).
    pub min_axis_component: f64,
    pub max_target_residual_m: f64,
    /// Other segments crossed before the target entry must miss the ray
    /// depth by at least this much.
    pub min_other_residual_m: f64,
    pub entry_margin_px: f64,
    pub min_distractor_residual_m: f64,
}

impl Default for Regime {
    fn default() -> Self {
        Self {
            min_axis_component: 0.1,
            max_target_residual_m: 0.15,
            min_other_residual_m: 0.6,
            entry_margin_px: 2.0,
            min_distractor_residual_m: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleParams {
    pub n_agents: usize,
    pub n_objects: usize,
    pub p_joint: f64,
    /// Put a depth-mismatched distractor on every participant's 2D ray.
    pub ambiguity: bool,
    /// Also require that no other segment is crossed before each target,
    /// so the 2D variant is exact too.
    pub clear_2d: bool,
    pub regime: Regime,
    pub max_attempts: usize,
}

impl Default for SampleParams {
    fn default() -> Self {
        Self {
            n_agents: 3,
            n_objects: 4,
            p_joint: 0.5,
            ambiguity: false,
            clear_2d: false,
            regime: Regime::default(),
            max_attempts: 1000,
        }
    }
}

impl SampleParams {
    pub fn check(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Params(m.to_string()));
        if self.n_agents < 2 {
            return bad("n_agents must be at least 2");
        }
        if self.n_objects < 1 {
            return bad("n_objects must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.p_joint) {
            return bad("p_joint must lie in [0, 1]");
        }
        if self.p_joint < 1.0 && self.n_objects < self.n_agents {
            return bad("negative scenes need n_objects >= n_agents");
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegimeViolation {
    #[error("face {0}: dominant gaze component below threshold")]
    AxisComponent(u32),
    #[error("face {0}: projected ray misses its target")]
    TargetMissed(u32),
    #[error("face {face}: target residual {residual:.3} m too large")]
    TargetResidual { face: u32, residual: f64 },
    #[error("face {face}: segment {segment} crossed first at a near-matching depth")]
    Ambiguous { face: u32, segment: u32 },
    #[error("face {face}: segment {segment} crossed before the target")]
    Blocked2d { face: u32, segment: u32 },
    #[error("face {0}: distractor is not the first crossing")]
    Distractor(u32),
    #[error("face {0}: no usable face depth")]
    FaceDepth(u32),
}

struct Crossing {
    segment_id: u32,
    t: f64,
    residual: f64,
}

fn crossings(scene: &SceneInput<f64>, face: &FaceObservation<f64>, face_width: f64) -> Option<Vec<Crossing>> {
    let dir = gaze_projection_2d(&face.gaze).direction()?;
    let scale = pixel_scale_with_face_width(face.ear_to_ear_px, face_width).ok()?;
    let z0 = face_depth(scene, face)?;
    let mut region: HashMap<u32, f64> = HashMap::new();
    let mut out = Vec::new();
    for c in corridor_scan(scene, face.eye_center_px, dir) {
        let rd = *region.entry(c.segment_id).or_insert_with(|| {
            region_mean_depth(&scene.depth, scene.segment(c.segment_id).expect("scanned segment"))
                .expect("non-empty mask")
        });
        let p = Point2::new(c.pixel.x as f64, c.pixel.y as f64);
        let ray = ray_depth_at_pixel(face.eye_center_px, z0, &face.gaze, scale, p).ok()?;
        out.push(Crossing {
            segment_id: c.segment_id,
            t: c.t,
            residual: (rd - ray).abs(),
        });
    }
    Some(out)
}

/// Checks that a noiseless render lies in the regime where the detector is
/// an exact oracle. Uses the exhaustive corridor scan, not the detector.
pub fn check_regime(
    scene: &SceneInput<f64>,
    truth: &GroundTruth,
    regime: &Regime,
    clear_2d: bool,
) -> Result<(), RegimeViolation> {
    for face in &scene.faces {
        let id = face.face_id;
        let g = &face.gaze;
        if g.gx().abs().max(g.gy().abs()) < regime.min_axis_component {
            return Err(RegimeViolation::AxisComponent(id));
        }
        let cs = crossings(scene, face, FACE_WIDTH_M).ok_or(RegimeViolation::FaceDepth(id))?;
        let target = truth.targets.get(&id).copied().flatten();
        let horizon = match target {
            Some(o) => {
                let entry = cs
                    .iter()
                    .filter(|c| c.segment_id == o)
                    .min_by(|a, b| a.t.total_cmp(&b.t))
                    .ok_or(RegimeViolation::TargetMissed(id))?;
                if entry.residual > regime.max_target_residual_m {
                    return Err(RegimeViolation::TargetResidual {
                        face: id,
                        residual: entry.residual,
                    });
                }
                entry.t + regime.entry_margin_px
            }
            None => f64::INFINITY,
        };
        for c in cs.iter().filter(|c| Some(c.segment_id) != target && c.t <= horizon) {
            if clear_2d {
                return Err(RegimeViolation::Blocked2d {
                    face: id,
                    segment: c.segment_id,
                });
            }
            if c.residual < regime.min_other_residual_m {
                return Err(RegimeViolation::Ambiguous {
                    face: id,
                    segment: c.segment_id,
                });
            }
        }
    }
    Ok(())
}

fn label_for(id: u32) -> String {
    let base = LABELS[(id as usize - 1) % LABELS.len()];
    if (id as usize) <= LABELS.len() {
        base.to_string()
    } else {
        format!("{base} {id}")
    }
}

fn layout(rng: &mut ChaCha8Rng, p: &SampleParams, targets: &[TargetRef]) -> WorldSpec {
    let camera = default_camera();
    let (f, w, h) = (camera.focal_px, camera.width as f64, camera.height as f64);
    let zc = rng.random_range(2.5..4.0);
    let objects = (1..=p.n_objects as u32)
        .map(|id| {
            let z = zc + rng.random_range(-0.5..0.5);
            let (bw, bh) = (rng.random_range(0.2..0.45), rng.random_range(0.2..0.45));
            let (mx, my) = (f * bw / (2.0 * z) + 2.0, f * bh / (2.0 * z) + 2.0);
            let u = rng.random_range(mx..w - mx);
            let v = rng.random_range(my..h - my);
            let c = back_project(&camera, Point2::new(u, v), z);
            ObjectSpec {
                object_id: id,
                label: label_for(id),
                center: [c.x, c.y, c.z],
                width_m: bw,
                height_m: bh,
            }
        })
        .collect();
    let agents = targets
        .iter()
        .enumerate()
        .map(|(i, &target)| {
            let z = zc + rng.random_range(-0.4..0.4);
            let u = rng.random_range(40.0..w - 40.0);
            let v = rng.random_range(60.0..h * 0.55);
            let c = back_project(&camera, Point2::new(u, v), z);
            AgentSpec {
                agent_id: i as u32 + 1,
                head_center: [c.x, c.y, c.z],
                target,
            }
        })
        .collect();
    WorldSpec {
        camera,
        agents,
        objects,
        background_depth_m: BACKGROUND_DEPTH_M,
        face_width_m: FACE_WIDTH_M,
    }
}

/// Adds one distractor per participant on its 2D ray, between the eye and
/// the target entry, at a depth well off the ray depth there.
fn place_distractors(
    rng: &mut ChaCha8Rng,
    world: &WorldSpec,
    scene: &SceneInput<f64>,
    truth: &GroundTruth,
) -> Option<WorldSpec> {
    let mut out = world.clone();
    let mut next_id = world.objects.iter().map(|o| o.object_id).max().unwrap_or(0) + 1;
    let cam = &world.camera;
    for face in &scene.faces {
        if !truth.participants().contains(&face.face_id) {
            continue;
        }
        let target = truth.targets[&face.face_id]?;
        let dir = gaze_projection_2d(&face.gaze).direction()?;
        let entry = trace_ray_hits(scene, face.eye_center_px, dir)
            .into_iter()
            .find(|h| h.segment_id == target)?;
        let s = rng.random_range(0.35..0.65);
        let d = entry.pixel_distance * s;
        let p = Point2::new(face.eye_center_px.x + dir.x * d, face.eye_center_px.y + dir.y * d);
        let scale = pixel_scale_with_face_width(face.ear_to_ear_px, world.face_width_m).ok()?;
        let ray = ray_depth_at_pixel(face.eye_center_px, face_depth(scene, face)?, &face.gaze, scale, p).ok()?;
        let delta = rng.random_range(1.0..1.6);
        let mut z = ray - delta;
        if z < 0.8 {
            z = ray + delta;
        }
        if z >= world.background_depth_m - 0.5 {
            return None;
        }
        let half_px = rng.random_range(6.0..20.0);
        let c = back_project(cam, p, z);
        let size = 2.0 * half_px * z / cam.focal_px;
        out.objects.push(super::ObjectSpec {
            object_id: next_id,
            label: DISTRACTOR_LABEL.to_string(),
            center: [c.x, c.y, c.z],
            width_m: size,
            height_m: size,
        });
        next_id += 1;
    }
    Some(out)
}

/// Every participant's nearest 2D crossing is a distractor that misses the
/// ray depth by the required margin.
fn check_distractors(scene: &SceneInput<f64>, truth: &GroundTruth, world: &WorldSpec, regime: &Regime) -> bool {
    let participants = truth.participants();
    scene.faces.iter().filter(|f| participants.contains(&f.face_id)).all(|face| {
        let Some(dir) = gaze_projection_2d(&face.gaze).direction() else {
            return false;
        };
        let Some(first) = trace_ray_hits(scene, face.eye_center_px, dir).into_iter().next() else {
            return false;
        };
        let is_distractor = world
            .object(first.segment_id)
            .is_some_and(|o| o.label == DISTRACTOR_LABEL);
        is_distractor
            && crossings(scene, face, world.face_width_m).is_some_and(|cs| {
                cs.iter()
                    .filter(|c| c.segment_id == first.segment_id)
                    .all(|c| c.residual >= regime.min_distractor_residual_m)
            })
    })
}

/// Samples a world, renders it, and resamples until the render is accepted
/// and lies in the detector's exact regime.
pub fn sample_scene(seed: u64, params: &SampleParams) -> Result<(WorldSpec, SceneInput<f64>, GroundTruth), SimError> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positive = rng.random_bool(params.p_joint);
    let n = params.n_agents;
    let k = if positive {
        let lo = 2.max((n + 1).saturating_sub(params.n_objects));
        rng.random_range(lo..=n)
    } else {
        0
    };
    for _ in 0..params.max_attempts {
        let mut objects: Vec<u32> = (1..=params.n_objects as u32).collect();
        objects.shuffle(&mut rng);
        let mut targets: Vec<TargetRef> = if positive {
            let shared = std::iter::repeat_n(objects[0], k);
            shared.chain(objects[1..].iter().copied().take(n - k)).map(TargetRef::Object).collect()
        } else {
            objects[..n].iter().copied().map(TargetRef::Object).collect()
        };
        targets.shuffle(&mut rng);
        let world = layout(&mut rng, params, &targets);
        let Ok((scene, truth)) = render_world(&world) else {
            continue;
        };
        if check_regime(&scene, &truth, &params.regime, params.clear_2d).is_err() {
            continue;
        }
        if !(params.ambiguity && positive) {
            return Ok((world, scene, truth));
        }
        for _ in 0..DISTRACTOR_TRIES {
            let Some(amb) = place_distractors(&mut rng, &world, &scene, &truth) else {
                continue;
            };
            let Ok((s2, t2)) = render_world(&amb) else {
                continue;
            };
            if check_regime(&s2, &t2, &params.regime, false).is_ok() && check_distractors(&s2, &t2, &amb, &params.regime) {
                return Ok((amb, s2, t2));
            }
        }
    }
    Err(SimError::BudgetExhausted(params.max_attempts))
}

pub fn sample_world(seed: u64, params: &SampleParams) -> Result<WorldSpec, SimError> {
    sample_scene(seed, params).map(|(w, _, _)| w)
}
