//! Seeded synthetic datasets on disk.
//!
//! Layout:
//! ```text
//! <dir>/scenes/<scene_id>.json   scene manifest
//! <dir>/scenes/<scene_id>.dmap   depth raster
//! <dir>/truth/<scene_id>.json    world spec and ground truth
//! <dir>/manifest.json            counts, seed and parameters (written last)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{read_scene_bundle, write_scene_bundle, ParseError, SceneInput};
use crate::sim::{apply_noise, sample_scene, GroundTruth, NoiseSpec, SampleParams, SimError, WorldSpec};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCENES_DIR: &str = "scenes";
pub const TRUTH_DIR: &str = "truth";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetParams {
    pub n_scenes: usize,
    pub seed: u64,
    pub sample: SampleParams,
    /// Noise applied after rendering; its `seed` field is replaced per scene.
    pub noise: NoiseSpec,
}

/// One generated scene with the labels it was rendered from.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneRecord {
    pub scene: SceneInput<f64>,
    pub world: WorldSpec,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub scene_id: String,
    pub world: WorldSpec,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub n_scenes: usize,
    pub n_positive: usize,
    pub n_negative: usize,
    pub params: DatasetParams,
    pub scene_ids: Vec<String>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("empty dataset")]
    Empty,
    #[error("scene {index}: {source}")]
    Sim { index: usize, source: SimError },
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", .path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("missing ground truth for scene {0}")]
    MissingTruth(String),
    #[error("truth file {path} describes scene {found}", path = .path.display())]
    TruthMismatch { path: PathBuf, found: String },
}

pub fn scene_id(index: usize) -> String {
    format!("scene_{index:04}")
}

/// Seeds for scene sampling and noise, from an independent stream per index.
pub fn scene_seeds(seed: u64, index: usize) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    (rng.next_u64(), rng.next_u64())
}

pub fn generate_scene(params: &DatasetParams, index: usize) -> Result<SceneRecord, SimError> {
    let (sample_seed, noise_seed) = scene_seeds(params.seed, index);
    let (world, mut scene, truth) = sample_scene(sample_seed, &params.sample)?;
    scene.scene_id = scene_id(index);
    let noise = NoiseSpec {
        seed: noise_seed,
        ..params.noise
    };
    let scene = apply_noise(&scene, &noise)?;
    Ok(SceneRecord { scene, world, truth })
}

/// Generates scenes in parallel; the result does not depend on thread count.
pub fn generate_dataset(params: &DatasetParams) -> Result<Vec<SceneRecord>, DatasetError> {
    if params.n_scenes == 0 {
        return Err(DatasetError::Empty);
    }
    params.noise.check().map_err(|source| DatasetError::Sim { index: 0, source })?;
    (0..params.n_scenes)
        .into_par_iter()
        .map(|i| generate_scene(params, i).map_err(|source| DatasetError::Sim { index: i, source }))
        .collect()
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), DatasetError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| DatasetError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    bytes.push(b'\n');
    crate::scene::write_atomic(path, &bytes).map_err(io(path))
}

fn read_json<D: for<'de> Deserialize<'de>>(path: &Path) -> Result<D, DatasetError> {
    let bytes = fs::read(path).map_err(io(path))?;
    serde_json::from_slice(&bytes).map_err(|source| DatasetError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn truth_path(dir: &Path, scene_id: &str) -> PathBuf {
    dir.join(TRUTH_DIR).join(format!("{scene_id}.json"))
}

pub fn scene_path(dir: &Path, scene_id: &str) -> PathBuf {
    dir.join(SCENES_DIR).join(format!("{scene_id}.json"))
}

/// Writes bundles and truth files in parallel, then the manifest.
pub fn write_dataset(dir: &Path, params: &DatasetParams, records: &[SceneRecord]) -> Result<DatasetManifest, DatasetError> {
    if records.is_empty() {
        return Err(DatasetError::Empty);
    }
    let scenes = dir.join(SCENES_DIR);
    let truth = dir.join(TRUTH_DIR);
    fs::create_dir_all(&scenes).map_err(io(&scenes))?;
    fs::create_dir_all(&truth).map_err(io(&truth))?;
    records.par_iter().try_for_each(|r| {
        write_scene_bundle(&scenes, &r.scene).map_err(io(&scenes))?;
        write_json(
            &truth_path(dir, &r.scene.scene_id),
            &TruthFile {
                scene_id: r.scene.scene_id.clone(),
                world: r.world.clone(),
                truth: r.truth.clone(),
            },
        )
    })?;
    let n_positive = records.iter().filter(|r| r.truth.has_joint_attention()).count();
    let manifest = DatasetManifest {
        n_scenes: records.len(),
        n_positive,
        n_negative: records.len() - n_positive,
        params: params.clone(),
        scene_ids: records.iter().map(|r| r.scene.scene_id.clone()).collect(),
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<DatasetManifest, DatasetError> {
    read_json(&dir.join(MANIFEST_FILE))
}

pub fn read_truth(dir: &Path, scene_id: &str) -> Result<TruthFile, DatasetError> {
    let path = truth_path(dir, scene_id);
    if !path.exists() {
        return Err(DatasetError::MissingTruth(scene_id.to_string()));
    }
    let t: TruthFile = read_json(&path)?;
    if t.scene_id != scene_id {
        return Err(DatasetError::TruthMismatch { path, found: t.scene_id });
    }
    Ok(t)
}

/// Loads every scene listed in the manifest with its ground truth.
pub fn read_dataset(dir: &Path) -> Result<Vec<SceneRecord>, DatasetError> {
    let manifest = read_manifest(dir)?;
    if manifest.scene_ids.is_empty() {
        return Err(DatasetError::Empty);
    }
    manifest
        .scene_ids
        .par_iter()
        .map(|id| {
            let t = read_truth(dir, id)?;
            let scene = read_scene_bundle(&scene_path(dir, id))?;
            Ok(SceneRecord {
                scene,
                world: t.world,
                truth: t.truth,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize) -> DatasetParams {
        DatasetParams {
            n_scenes: n,
            seed: 5,
            sample: SampleParams::default(),
            noise: NoiseSpec::default(),
        }
    }

    #[test]
    fn round_trip_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let p = params(4);
        let recs = generate_dataset(&p).unwrap();
        let m = write_dataset(dir.path(), &p, &recs).unwrap();
        assert_eq!(m.n_scenes, 4);
        assert_eq!(m.n_positive + m.n_negative, 4);
        assert_eq!(m.scene_ids[2], "scene_0002");
        let back = read_dataset(dir.path()).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn empty_and_missing_truth() {
        assert!(matches!(generate_dataset(&params(0)), Err(DatasetError::Empty)));
        let dir = tempfile::tempdir().unwrap();
        let p = params(2);
        let recs = generate_dataset(&p).unwrap();
        write_dataset(dir.path(), &p, &recs).unwrap();
        fs::remove_file(truth_path(dir.path(), "scene_0001")).unwrap();
        let err = read_dataset(dir.path()).unwrap_err();
        assert!(matches!(err, DatasetError::MissingTruth(ref id) if id == "scene_0001"));
    }

    #[test]
    fn seeds_are_independent_of_thread_order() {
        let p = params(6);
        let a = generate_dataset(&p).unwrap();
        let b: Vec<_> = (0..6).map(|i| generate_scene(&p, i).unwrap()).collect();
        assert_eq!(a, b);
        assert_ne!(scene_seeds(5, 0), scene_seeds(5, 1));
    }
}
