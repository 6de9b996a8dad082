//! Aggregation of per-face detections into joint-attention events, agent
//! roles, captions and a per-scene report.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::{detect_target, DetectError, DetectorConfig, Outcome, TargetDetection};
use crate::scalar::Scalar;
use crate::scene::{validate_scene, SceneInput, Violation};

/// Proposals flagged as overlapping when their IOU exceeds this.
pub const OVERLAP_FLAG_IOU: f64 = 0.5;

/// A segment validated as the gaze target of two or more faces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointAttentionEvent {
    pub segment_id: u32,
    pub participant_face_ids: BTreeSet<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentRole {
    Participant,
    NonParticipant,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttentionError {
    #[error("duplicate detection for face {0}")]
    DuplicateFace(u32),
}

/// Groups targets by segment id; every group of two or more faces is an
/// event. Events are sorted by segment id.
pub fn resolve_events<T: Scalar>(detections: &[TargetDetection<T>]) -> Result<Vec<JointAttentionEvent>, AttentionError> {
    let mut seen = HashSet::new();
    let mut groups: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for d in detections {
        if !seen.insert(d.face_id) {
            return Err(AttentionError::DuplicateFace(d.face_id));
        }
        if let Some(seg) = d.outcome.target_segment() {
            groups.entry(seg).or_default().insert(d.face_id);
        }
    }
    Ok(groups
        .into_iter()
        .filter(|(_, faces)| faces.len() >= 2)
        .map(|(segment_id, participant_face_ids)| JointAttentionEvent {
            segment_id,
            participant_face_ids,
        })
        .collect())
}

pub fn classify_agents(
    face_ids: impl IntoIterator<Item = u32>,
    events: &[JointAttentionEvent],
) -> BTreeMap<u32, AgentRole> {
    face_ids
        .into_iter()
        .map(|id| {
            let role = if events.iter().any(|e| e.participant_face_ids.contains(&id)) {
                AgentRole::Participant
            } else {
                AgentRole::NonParticipant
            };
            (id, role)
        })
        .collect()
}

/// "X people are looking at Y"; unlabeled targets read "segment <id>".
pub fn make_caption(event: &JointAttentionEvent, label: Option<&str>) -> String {
    let target = match label {
        Some(l) if !l.is_empty() => l.to_string(),
        _ => format!("segment {}", event.segment_id),
    };
    format!("{} people are looking at {}", event.participant_face_ids.len(), target)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FaceReport<T: Scalar> {
    pub face_id: u32,
    pub role: AgentRole,
    pub outcome: Outcome<T>,
}

/// Distinct targets whose proposals overlap heavily; kept separate but
/// flagged for audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapFlag {
    pub segment_a: u32,
    pub segment_b: u32,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SceneReport<T: Scalar> {
    pub scene_id: String,
    pub faces: Vec<FaceReport<T>>,
    pub events: Vec<JointAttentionEvent>,
    pub has_joint_attention: bool,
    pub captions: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overlapping_targets: Vec<OverlapFlag>,
}

impl<T: Scalar> SceneReport<T> {
    pub fn roles(&self) -> BTreeMap<u32, AgentRole> {
        self.faces.iter().map(|f| (f.face_id, f.role)).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }
}

#[derive(Debug, Error)]
pub enum AnalyzeError {
    #[error("scene {scene_id} invalid: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid {
        scene_id: String,
        violations: Vec<Violation>,
    },
    #[error("scene {scene_id}: {source}")]
    Detect { scene_id: String, source: DetectError },
}

/// Full pipeline for one scene. Faces are reported in face-id order, so the
/// result does not depend on input ordering.
pub fn analyze_scene<T: Scalar>(scene: &SceneInput<T>, config: &DetectorConfig<T>) -> Result<SceneReport<T>, AnalyzeError> {
    let violations = validate_scene(scene);
    if !violations.is_empty() {
        return Err(AnalyzeError::Invalid {
            scene_id: scene.scene_id.clone(),
            violations,
        });
    }
    let mut detections = scene
        .faces
        .iter()
        .map(|f| detect_target(scene, f, config))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|source| AnalyzeError::Detect {
            scene_id: scene.scene_id.clone(),
            source,
        })?;
    detections.sort_by_key(|d| d.face_id);
    let events = resolve_events(&detections).expect("validated scenes have unique face ids");
    let roles = classify_agents(detections.iter().map(|d| d.face_id), &events);
    let captions = events
        .iter()
        .map(|e| make_caption(e, scene.segment(e.segment_id).and_then(|s| s.label.as_deref())))
        .collect();

    let mut overlapping_targets = Vec::new();
    let targets: BTreeSet<u32> = detections.iter().filter_map(|d| d.outcome.target_segment()).collect();
    let targets: Vec<u32> = targets.into_iter().collect();
    for (i, &a) in targets.iter().enumerate() {
        for &b in &targets[i + 1..] {
            let (Some(sa), Some(sb)) = (scene.segment(a), scene.segment(b)) else {
                continue;
            };
            let inter = sa.mask.intersection_count(&sb.mask).unwrap_or(0);
            if inter == 0 {
                continue;
            }
            let iou = inter as f64 / (sa.mask.len() + sb.mask.len() - inter) as f64;
            if iou > OVERLAP_FLAG_IOU {
                overlapping_targets.push(OverlapFlag {
                    segment_a: a,
                    segment_b: b,
                    iou,
                });
            }
        }
    }

    Ok(SceneReport {
        scene_id: scene.scene_id.clone(),
        faces: detections
            .into_iter()
            .map(|d| FaceReport {
                face_id: d.face_id,
                role: roles[&d.face_id],
                outcome: d.outcome,
            })
            .collect(),
        has_joint_attention: !events.is_empty(),
        events,
        captions,
        overlapping_targets,
    })
}
