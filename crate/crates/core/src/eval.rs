//! Metrics and the dataset harness: common-target IOU, agent detection
//! accuracy, joint-attention classification, and the 3D vs 2D ablation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attention::{analyze_scene, AgentRole, AnalyzeError, SceneReport};
use crate::detect::{DetectorConfig, Mode};
use crate::scalar::Scalar;
use crate::scene::{Mask, MaskError, SceneInput};
use crate::sim::GroundTruth;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty dataset")]
    Empty,
    #[error("scene {scene_id}: {source}")]
    Mask { scene_id: String, source: MaskError },
    #[error("scene {scene_id}: predicted faces {predicted:?} differ from truth faces {truth:?}")]
    FaceMismatch {
        scene_id: String,
        predicted: Vec<u32>,
        truth: Vec<u32>,
    },
    #[error("scene {scene_id}: no faces to score")]
    NoFaces { scene_id: String },
    #[error("report for scene {found} paired with scene {expected}")]
    SceneMismatch { expected: String, found: String },
    #[error(transparent)]
    Analyze(#[from] AnalyzeError),
}

/// `|a ∩ b| / |a ∪ b|`, with 1.0 when both are empty.
pub fn mask_iou(a: &Mask, b: &Mask) -> Result<f64, MaskError> {
    let union = a.union_count(b)?;
    if union == 0 {
        return Ok(1.0);
    }
    Ok(a.intersection_count(b)? as f64 / union as f64)
}

/// Fraction of faces whose participant label matches the truth.
pub fn agent_accuracy(
    predicted: &BTreeMap<u32, AgentRole>,
    truth: &BTreeMap<u32, AgentRole>,
) -> Result<f64, (Vec<u32>, Vec<u32>)> {
    if !predicted.keys().eq(truth.keys()) || truth.is_empty() {
        return Err((predicted.keys().copied().collect(), truth.keys().copied().collect()));
    }
    let correct = truth.iter().filter(|(id, r)| predicted[id] == **r).count();
    Ok(correct as f64 / truth.len() as f64)
}

/// Mean over true events of the best-matching predicted event's IOU. `None`
/// for scenes without a true common target.
pub fn scene_target_iou<T: Scalar>(
    report: &SceneReport<T>,
    scene: &SceneInput<T>,
    truth: &GroundTruth,
) -> Result<Option<f64>, MaskError> {
    if truth.events.is_empty() {
        return Ok(None);
    }
    let mut total = 0.0;
    for t in &truth.events {
        let true_mask = &truth.masks[&t.object_id];
        let mut best: f64 = 0.0;
        for e in &report.events {
            if let Some(seg) = scene.segment(e.segment_id) {
                best = best.max(mask_iou(&seg.mask, true_mask)?);
            }
        }
        total += best;
    }
    Ok(Some(total / truth.events.len() as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRow {
    pub scene_id: String,
    pub mode: Mode,
    /// Empty for scenes without a true common target.
    pub iou: Option<f64>,
    pub agent_acc: f64,
    pub predicted_ja: bool,
    pub true_ja: bool,
    pub n_faces: usize,
    pub n_faces_correct: usize,
    pub predicted_events: usize,
}

/// Scores one report against ground truth.
pub fn score_scene<T: Scalar>(
    report: &SceneReport<T>,
    scene: &SceneInput<T>,
    truth: &GroundTruth,
    mode: Mode,
) -> Result<SceneRow, EvalError> {
    if report.scene_id != scene.scene_id {
        return Err(EvalError::SceneMismatch {
            expected: scene.scene_id.clone(),
            found: report.scene_id.clone(),
        });
    }
    let predicted = report.roles();
    let true_roles = truth.roles();
    let acc = agent_accuracy(&predicted, &true_roles).map_err(|(predicted, truth)| {
        if truth.is_empty() {
            EvalError::NoFaces {
                scene_id: scene.scene_id.clone(),
            }
        } else {
            EvalError::FaceMismatch {
                scene_id: scene.scene_id.clone(),
                predicted,
                truth,
            }
        }
    })?;
    let iou = scene_target_iou(report, scene, truth).map_err(|source| EvalError::Mask {
        scene_id: scene.scene_id.clone(),
        source,
    })?;
    let n_faces_correct = true_roles.iter().filter(|(id, r)| predicted[id] == **r).count();
    Ok(SceneRow {
        scene_id: scene.scene_id.clone(),
        mode,
        iou,
        agent_acc: acc,
        predicted_ja: report.has_joint_attention,
        true_ja: truth.has_joint_attention(),
        n_faces: true_roles.len(),
        n_faces_correct,
        predicted_events: report.events.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub mode: Mode,
    pub n_scenes: usize,
    pub n_positive: usize,
    /// Mean over positive scenes; `None` when there are none.
    pub mean_target_iou: Option<f64>,
    /// Mean of per-scene accuracies.
    pub agent_accuracy: f64,
    /// Correct faces over all faces, for comparison.
    pub agent_accuracy_by_face: f64,
    pub ja_classification_accuracy: f64,
    pub rows: Vec<SceneRow>,
}

impl EvalSummary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

/// Folds rows in scene-id order.
pub fn summarize(mode: Mode, mut rows: Vec<SceneRow>) -> Result<EvalSummary, EvalError> {
    if rows.is_empty() {
        return Err(EvalError::Empty);
    }
    rows.sort_by(|a, b| a.scene_id.cmp(&b.scene_id));
    let n = rows.len() as f64;
    let ious: Vec<f64> = rows.iter().filter_map(|r| r.iou).collect();
    let faces: usize = rows.iter().map(|r| r.n_faces).sum();
    let correct: usize = rows.iter().map(|r| r.n_faces_correct).sum();
    Ok(EvalSummary {
        mode,
        n_scenes: rows.len(),
        n_positive: rows.iter().filter(|r| r.true_ja).count(),
        mean_target_iou: (!ious.is_empty()).then(|| ious.iter().sum::<f64>() / ious.len() as f64),
        agent_accuracy: rows.iter().map(|r| r.agent_acc).sum::<f64>() / n,
        agent_accuracy_by_face: correct as f64 / faces as f64,
        ja_classification_accuracy: rows.iter().filter(|r| r.predicted_ja == r.true_ja).count() as f64 / n,
        rows,
    })
}

/// Runs the detector on every scene (in parallel) and aggregates.
pub fn evaluate_dataset<T: Scalar>(
    pairs: &[(&SceneInput<T>, &GroundTruth)],
    config: &DetectorConfig<T>,
) -> Result<EvalSummary, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::Empty);
    }
    let rows = pairs
        .par_iter()
        .map(|(scene, truth)| {
            let report = analyze_scene(scene, config)?;
            score_scene(&report, scene, truth, config.mode)
        })
        .collect::<Result<Vec<_>, _>>()?;
    summarize(config.mode, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationPair {
    pub three_d: EvalSummary,
    pub two_d: EvalSummary,
}

impl AblationPair {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("ablation serializes");
        s.push('\n');
        s
    }
}

pub fn run_ablation<T: Scalar>(
    pairs: &[(&SceneInput<T>, &GroundTruth)],
    config: &DetectorConfig<T>,
) -> Result<AblationPair, EvalError> {
    Ok(AblationPair {
        three_d: evaluate_dataset(pairs, &config.with_mode(Mode::ThreeD))?,
        two_d: evaluate_dataset(pairs, &config.with_mode(Mode::TwoD))?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub depth_tolerance_m: f64,
    pub ja_classification_accuracy: f64,
    pub agent_accuracy: f64,
    pub mean_target_iou: Option<f64>,
}

/// 3D-mode metrics at each tolerance.
pub fn tolerance_sweep<T: Scalar>(
    pairs: &[(&SceneInput<T>, &GroundTruth)],
    config: &DetectorConfig<T>,
    tolerances: &[T],
) -> Result<Vec<SweepPoint>, EvalError> {
    tolerances
        .iter()
        .map(|&tol| {
            let s = evaluate_dataset(pairs, &config.with_mode(Mode::ThreeD).with_tolerance(tol))?;
            Ok(SweepPoint {
                depth_tolerance_m: tol.to_f64_lossy(),
                ja_classification_accuracy: s.ja_classification_accuracy,
                agent_accuracy: s.agent_accuracy,
                mean_target_iou: s.mean_target_iou,
            })
        })
        .collect()
}

/// The per-scene table as CSV with a header row.
pub fn rows_to_csv(rows: &[SceneRow]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
