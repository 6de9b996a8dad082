//! Billboard-world simulator.
//!
//! Objects and heads are fronto-parallel rectangles at constant depth, so
//! every region's depth is exact and the rendered segments, depth map and
//! gaze vectors carry exact ground truth. Scenes are the oracle for the
//! detector: see [`render_world`], [`sample_world`] and [`apply_noise`].

mod noise;
mod render;
mod sample;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attention::AgentRole;
use crate::geometry::{CameraModel, Point2};
use crate::scene::Mask;

pub use noise::{apply_noise, perturb_gaze, NoiseSpec};
pub use render::{billboards, render_world, Billboard, RenderError};
pub use sample::{check_regime, sample_scene, sample_world, Regime, RegimeViolation, SampleParams};

/// Segment ids of head billboards are offset by this from the agent id.
pub const FACE_SEGMENT_BASE: u32 = 1000;
/// Head billboards are this many times taller than wide.
pub const FACE_HEIGHT_RATIO: f64 = 1.3;
pub const DISTRACTOR_LABEL: &str = "distractor";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetRef {
    Object(u32),
    /// Gaze direction with no target object.
    Free([f64; 3]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub agent_id: u32,
    pub head_center: [f64; 3],
    pub target: TargetRef,
}

/// A fronto-parallel rectangle at constant depth `center[2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub object_id: u32,
    pub label: String,
    pub center: [f64; 3],
    pub width_m: f64,
    pub height_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSpec {
    pub camera: CameraModel<f64>,
    pub agents: Vec<AgentSpec>,
    pub objects: Vec<ObjectSpec>,
    pub background_depth_m: f64,
    #[serde(default = "default_face_width")]
    pub face_width_m: f64,
}

fn default_face_width() -> f64 {
    crate::geometry::FACE_WIDTH_M
}

impl WorldSpec {
    pub fn object(&self, id: u32) -> Option<&ObjectSpec> {
        self.objects.iter().find(|o| o.object_id == id)
    }

    pub fn agent(&self, id: u32) -> Option<&AgentSpec> {
        self.agents.iter().find(|a| a.agent_id == id)
    }
}

/// The VGA camera used by the sampler.
pub fn default_camera() -> CameraModel<f64> {
    CameraModel::new(500.0, Point2::new(320.0, 240.0), 640, 480).expect("valid camera")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthEvent {
    pub object_id: u32,
    pub segment_id: u32,
    pub participants: BTreeSet<u32>,
}

/// Labels induced by a rendered world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Target object per agent (`None` for free gaze).
    pub targets: BTreeMap<u32, Option<u32>>,
    pub events: Vec<TruthEvent>,
    /// Visible pixels of every targeted object, keyed by object id.
    pub masks: BTreeMap<u32, Mask>,
}

impl GroundTruth {
    pub fn has_joint_attention(&self) -> bool {
        !self.events.is_empty()
    }

    pub fn participants(&self) -> BTreeSet<u32> {
        self.events.iter().flat_map(|e| e.participants.iter().copied()).collect()
    }

    pub fn roles(&self) -> BTreeMap<u32, AgentRole> {
        let p = self.participants();
        self.targets
            .keys()
            .map(|&id| {
                let role = if p.contains(&id) {
                    AgentRole::Participant
                } else {
                    AgentRole::NonParticipant
                };
                (id, role)
            })
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid sampling parameters: {0}")]
    Params(String),
    #[error("resampling budget exhausted after {0} attempts")]
    BudgetExhausted(usize),
    #[error(transparent)]
    Render(#[from] RenderError),
}
