//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use jointgaze::attention::{analyze_scene, SceneReport};
use jointgaze::dataset::{generate_dataset, scene_seeds, write_dataset, DatasetParams, SceneRecord};
use jointgaze::detect::{DetectorConfig, Mode};
use jointgaze::eval::{evaluate_dataset, EvalSummary};
use jointgaze::geometry::{
    angular_error_deg, back_project, gaze_projection_2d, pixel_scale_at_face, project_world_point, ray_depth_at_pixel,
    CameraModel, GazeVector, PixelScale, Point2, Point3, FACE_WIDTH_M,
};
use jointgaze::scene::{
    parse_scene, serialize_scene, trace_ray_hits, trace_ray_hits_exhaustive, DepthMap, FaceObservation, Mask,
    PixelRect, SegmentProposal,
};
use jointgaze::sim::{apply_noise, perturb_gaze, sample_scene, GroundTruth, NoiseSpec, SampleParams};
use jointgaze::{Config, Scene};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances and sizes
const DEPTH_TOLERANCE_M: f64 = 0.3;
const ORACLE_SCENES: usize = 200;
const ORACLE_P_JOINT: f64 = 0.49;
const ORACLE_RUNTIME: Duration = Duration::from_secs(10);
const AMBIGUITY_SCENES: usize = 100;
const TRACE_SCENES: usize = 120;
const TRACE_DISTANCE_PX: f64 = 1.0;
const GEOMETRY_ABS: f64 = 1e-9;
const PROJECTION_PX: f64 = 1e-6;
const NOISE_LEVELS_DEG: [f64; 4] = [0.0, 5.0, 10.0, 20.0];
const NOISE_SCENES: usize = 200;
const CALIBRATION_SIGMA_DEG: f64 = 10.0;
const CALIBRATION_DRAWS: usize = 10_000;
const CALIBRATION_RANGE: (f64, f64) = (7.2, 8.8);
const CAPTION_PATTERN: &str = r"^([1-9][0-9]*) people are looking at (.+)$";
const ROUND_TRIP_SCENES: usize = 1000;
const SEED: u64 = 7;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn config() -> Config {
    DetectorConfig::default().with_tolerance(DEPTH_TOLERANCE_M)
}

fn pairs(records: &[SceneRecord]) -> Vec<(&Scene, &GroundTruth)> {
    records.iter().map(|r| (&r.scene, &r.truth)).collect()
}

fn dataset(n: usize, seed: u64, sample: SampleParams) -> Vec<SceneRecord> {
    generate_dataset(&DatasetParams {
        n_scenes: n,
        seed,
        sample,
        noise: NoiseSpec::default(),
    })
    .expect("dataset generates")
}

fn single_thread<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn oracle_closure(records: &[SceneRecord]) -> Outcome {
    let p = pairs(records);
    let start = Instant::now();
    let s = single_thread(|| evaluate_dataset(&p, &config()).unwrap());
    let elapsed = start.elapsed();
    let iou = s.mean_target_iou.unwrap_or(f64::NAN);
    let pass = s.ja_classification_accuracy == 1.0 && s.agent_accuracy == 1.0 && iou == 1.0 && elapsed <= ORACLE_RUNTIME;
    outcome(
        pass,
        format!(
            "{} scenes ({} positive): JA acc {:.3}, agent acc {:.3}, mean IOU {:.3}, analysis {:.2}s single-thread (limit {}s)",
            s.n_scenes,
            s.n_positive,
            s.ja_classification_accuracy,
            s.agent_accuracy,
            iou,
            elapsed.as_secs_f64(),
            ORACLE_RUNTIME.as_secs()
        ),
    )
}

fn per_scene_iou(s: &EvalSummary) -> BTreeMap<String, Option<f64>> {
    s.rows.iter().map(|r| (r.scene_id.clone(), r.iou)).collect()
}

fn ablation(ambiguous: &[SceneRecord], oracle: &[SceneRecord]) -> Outcome {
    let p = pairs(ambiguous);
    let three = evaluate_dataset(&p, &config()).unwrap();
    let two = evaluate_dataset(&p, &config().with_mode(Mode::TwoD)).unwrap();
    let all_3d = three.rows.iter().all(|r| r.iou == Some(1.0));
    let all_2d = two.rows.iter().all(|r| r.iou == Some(0.0));

    // mixed suite: half ambiguous, half plain noiseless scenes, unique ids
    let mut mixed: Vec<SceneRecord> = ambiguous[..AMBIGUITY_SCENES / 2].to_vec();
    mixed.extend(oracle[..AMBIGUITY_SCENES / 2].iter().cloned().map(|mut r| {
        r.scene.scene_id = format!("plain_{}", r.scene.scene_id);
        r
    }));
    let mp = pairs(&mixed);
    let m3 = per_scene_iou(&evaluate_dataset(&mp, &config()).unwrap());
    let m2 = per_scene_iou(&evaluate_dataset(&mp, &config().with_mode(Mode::TwoD)).unwrap());
    let dominated = m3.iter().all(|(id, a)| match (a, m2[id]) {
        (Some(a), Some(b)) => *a >= b,
        (None, None) => true,
        _ => false,
    });
    outcome(
        all_3d && all_2d && dominated,
        format!(
            "ambiguity suite {} scenes: IOU_3D=1 on {}/{}, IOU_2D=0 on {}/{}; mixed suite {} scenes IOU_3D >= IOU_2D per scene: {}",
            ambiguous.len(),
            three.rows.iter().filter(|r| r.iou == Some(1.0)).count(),
            three.rows.len(),
            two.rows.iter().filter(|r| r.iou == Some(0.0)).count(),
            two.rows.len(),
            mixed.len(),
            dominated
        ),
    )
}

fn trace_equivalence() -> Outcome {
    // sampled layouts with randomized gaze and jittered masks
    let params = SampleParams {
        n_agents: 4,
        n_objects: 5,
        ..Default::default()
    };
    let mut rays = 0usize;
    let mut worst = 0.0f64;
    let mut mismatches = 0usize;
    for i in 0..TRACE_SCENES {
        let (_, scene, _) = sample_scene(1000 + i as u64, &params).unwrap();
        let scene = apply_noise(
            &scene,
            &NoiseSpec {
                gaze_sigma_deg: 60.0,
                mask_jitter_px: 3,
                seed: i as u64,
                ..Default::default()
            },
        )
        .unwrap();
        for f in &scene.faces {
            let Some(dir) = gaze_projection_2d(&f.gaze).direction() else {
                continue;
            };
            rays += 1;
            let fast = trace_ray_hits(&scene, f.eye_center_px, dir);
            let slow = trace_ray_hits_exhaustive(&scene, f.eye_center_px, dir);
            let ids = |v: &[jointgaze::scene::RayHit<f64>]| {
                let mut ids: Vec<u32> = v.iter().map(|h| h.segment_id).collect();
                ids.sort_unstable();
                ids
            };
            if ids(&fast) != ids(&slow) {
                mismatches += 1;
                continue;
            }
            for h in &fast {
                let s = slow.iter().find(|s| s.segment_id == h.segment_id).unwrap();
                worst = worst.max((h.pixel_distance - s.pixel_distance).abs());
            }
        }
    }
    outcome(
        mismatches == 0 && worst <= TRACE_DISTANCE_PX,
        format!(
            "{TRACE_SCENES} scenes, {rays} rays: segment-set mismatches {mismatches}, max distance gap {worst:.3} px (limit {TRACE_DISTANCE_PX})"
        ),
    )
}

fn geometry_examples() -> Outcome {
    let eye = Point2::new(200.0, 100.0);
    let scale = PixelScale::new(0.003).unwrap();
    let g = |x: f64, y: f64, z: f64| GazeVector::normalized(x, y, z).unwrap();
    let cases = [
        (g(0.707, 0.0, 0.707), Point2::new(300.0, 100.0), 2.3),
        (g(0.6, 0.0, -0.8), Point2::new(300.0, 100.0), 1.6),
        (g(0.0, 0.6, 0.8), Point2::new(200.0, 150.0), 2.2),
    ];
    let mut worst_depth = 0.0f64;
    for (gaze, p, want) in cases {
        let got = ray_depth_at_pixel(eye, 2.0, &gaze, scale, p).unwrap();
        worst_depth = worst_depth.max((got - want).abs());
    }
    let scale_exact = [10.0, 37.5, 50.0, 150.0, 333.0]
        .iter()
        .all(|&ear| pixel_scale_at_face(ear).unwrap().meters_per_pixel() == FACE_WIDTH_M / ear);

    let cam = CameraModel::new(500.0, Point2::new(320.0, 240.0), 640, 480).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_px = 0.0f64;
    for _ in 0..10_000 {
        let px = Point2::new(rng.random_range(0.0..640.0), rng.random_range(0.0..480.0));
        let z = rng.random_range(0.2..50.0);
        let back = project_world_point(&cam, back_project(&cam, px, z)).unwrap();
        worst_px = worst_px.max(back.sub(px).norm());
        let q = Point3::new(rng.random_range(-3.0..3.0), rng.random_range(-2.0..2.0), z);
        let p = project_world_point(&cam, q).unwrap();
        let again = project_world_point(&cam, back_project(&cam, p, q.z)).unwrap();
        worst_px = worst_px.max(again.sub(p).norm());
    }
    outcome(
        worst_depth <= GEOMETRY_ABS && scale_exact && worst_px < PROJECTION_PX,
        format!(
            "ray depth examples max error {worst_depth:.2e} (limit {GEOMETRY_ABS:e}); scale 0.15/ear exact: {scale_exact}; projection round-trip max {worst_px:.2e} px (limit {PROJECTION_PX:e})"
        ),
    )
}

fn noise_monotonicity(base: &[SceneRecord]) -> Outcome {
    let mut accs = Vec::new();
    for &sigma in &NOISE_LEVELS_DEG {
        let noisy: Vec<SceneRecord> = base
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let spec = NoiseSpec {
                    gaze_sigma_deg: sigma,
                    seed: scene_seeds(SEED, i).1,
                    ..Default::default()
                };
                SceneRecord {
                    scene: apply_noise(&r.scene, &spec).unwrap(),
                    ..r.clone()
                }
            })
            .collect();
        accs.push(evaluate_dataset(&pairs(&noisy), &config()).unwrap().agent_accuracy);
    }
    let monotone = accs.windows(2).all(|w| w[1] <= w[0]);
    let curve: Vec<String> = NOISE_LEVELS_DEG
        .iter()
        .zip(&accs)
        .map(|(s, a)| format!("{s}°: {a:.3}"))
        .collect();
    outcome(
        monotone && accs[0] == 1.0,
        format!("{} scenes per level, agent acc {}", base.len(), curve.join(", ")),
    )
}

fn calibration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut total = 0.0;
    for _ in 0..CALIBRATION_DRAWS {
        let g = GazeVector::normalized(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
        .unwrap_or(GazeVector::new(0.0, 0.0, 1.0).unwrap());
        total += angular_error_deg(&g, &perturb_gaze(&g, CALIBRATION_SIGMA_DEG, &mut rng));
    }
    let mean = total / CALIBRATION_DRAWS as f64;
    outcome(
        (CALIBRATION_RANGE.0..=CALIBRATION_RANGE.1).contains(&mean),
        format!(
            "sigma {CALIBRATION_SIGMA_DEG}°, {CALIBRATION_DRAWS} draws: mean angular error {mean:.3}° (range [{}, {}], expected {:.3}°)",
            CALIBRATION_RANGE.0,
            CALIBRATION_RANGE.1,
            CALIBRATION_SIGMA_DEG * (2.0 / std::f64::consts::PI).sqrt()
        ),
    )
}

fn captions(suites: &[&[SceneRecord]]) -> Outcome {
    let re = regex::Regex::new(CAPTION_PATTERN).unwrap();
    let (mut events, mut captioned, mut conform) = (0usize, 0usize, 0usize);
    for suite in suites {
        for r in *suite {
            for mode in [Mode::ThreeD, Mode::TwoD] {
                let rep: SceneReport<f64> = analyze_scene(&r.scene, &config().with_mode(mode)).unwrap();
                events += rep.events.len();
                if rep.captions.len() != rep.events.len() {
                    continue;
                }
                for (e, c) in rep.events.iter().zip(&rep.captions) {
                    captioned += 1;
                    let Some(m) = re.captures(c) else { continue };
                    let label = r
                        .scene
                        .segment(e.segment_id)
                        .and_then(|s| s.label.clone())
                        .unwrap_or_else(|| format!("segment {}", e.segment_id));
                    if m[1].parse::<usize>() == Ok(e.participant_face_ids.len()) && m[2] == label {
                        conform += 1;
                    }
                }
            }
        }
    }
    outcome(
        events > 0 && captioned == events && conform == events,
        format!("{events} events, {captioned} captioned, {conform} match \"X people are looking at Y\""),
    )
}

fn random_scene(rng: &mut ChaCha8Rng, i: usize) -> Scene {
    let (w, h) = (rng.random_range(4..48u32), rng.random_range(4..48u32));
    let camera = CameraModel::new(
        rng.random_range(10.0..900.0),
        Point2::new(rng.random_range(0.0..w as f64), rng.random_range(0.0..h as f64)),
        w,
        h,
    )
    .unwrap();
    let depth = DepthMap::new(
        w,
        h,
        (0..w * h).map(|_| rng.random_range(0.05f32..30.0)).collect(),
    )
    .unwrap();
    let faces = (0..rng.random_range(1..5u32))
        .map(|k| {
            let gaze = loop {
                if let Some(g) = GazeVector::normalized(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ) {
                    break g;
                }
            };
            let x = rng.random_range(0.0..w as f64 - 0.5);
            let y = rng.random_range(0.0..h as f64 - 0.5);
            FaceObservation {
                face_id: k * 3 + 1,
                eye_center_px: Point2::new(x, y),
                ear_to_ear_px: rng.random_range(0.5..200.0),
                gaze,
                face_bbox: rng.random_bool(0.5).then_some(PixelRect {
                    x_min: x - 2.0,
                    y_min: y - 2.0,
                    x_max: x + 2.5,
                    y_max: y + 3.0,
                }),
            }
        })
        .collect();
    let segments = (0..rng.random_range(1..6u32))
        .map(|k| {
            let dense: Vec<bool> = (0..w * h).map(|_| rng.random_bool(0.3)).collect();
            let mut mask = Mask::from_dense(w, h, &dense);
            if mask.is_empty() {
                mask = Mask::from_indices(w, h, [0]);
            }
            SegmentProposal {
                segment_id: k * 7 + 2,
                mask,
                label: rng.random_bool(0.5).then(|| format!("thing \"{k}\" ü")),
            }
        })
        .collect();
    Scene {
        scene_id: format!("rt_{i:04}"),
        camera,
        faces,
        depth,
        segments,
    }
}

fn read_tree(root: &std::path::Path) -> BTreeMap<std::path::PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism_and_round_trip() -> Outcome {
    let params = DatasetParams {
        n_scenes: 20,
        seed: SEED,
        sample: SampleParams {
            p_joint: ORACLE_P_JOINT,
            ..Default::default()
        },
        noise: NoiseSpec {
            gaze_sigma_deg: 5.0,
            depth_sigma_m: 0.05,
            mask_jitter_px: 1,
            seed: 0,
        },
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_dataset(a.path(), &params, &generate_dataset(&params).unwrap()).unwrap();
    let second = single_thread(|| generate_dataset(&params).unwrap());
    write_dataset(b.path(), &params, &second).unwrap();
    let (ta, tb) = (read_tree(a.path()), read_tree(b.path()));
    let identical = !ta.is_empty() && ta == tb;

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut ok = 0usize;
    for i in 0..ROUND_TRIP_SCENES {
        let s = random_scene(&mut rng, i);
        let bundle = serialize_scene(&s);
        let back: Scene = match parse_scene(&bundle.manifest, &bundle.depth) {
            Ok(b) => b,
            Err(_) => continue,
        };
        let again = serialize_scene(&back);
        if back == s && again.manifest == bundle.manifest && again.depth == bundle.depth {
            ok += 1;
        }
    }
    outcome(
        identical && ok == ROUND_TRIP_SCENES,
        format!(
            "two dataset writes ({} files) byte-identical: {identical}; parse∘serialize identity on {ok}/{ROUND_TRIP_SCENES} random scenes",
            ta.len()
        ),
    )
}

fn main() {
    let t0 = Instant::now();
    let oracle = dataset(
        ORACLE_SCENES,
        SEED,
        SampleParams {
            p_joint: ORACLE_P_JOINT,
            ..Default::default()
        },
    );
    let ambiguous = dataset(
        AMBIGUITY_SCENES,
        SEED + 1,
        SampleParams {
            p_joint: 1.0,
            ambiguity: true,
            ..Default::default()
        },
    );
    let noise_base = &oracle[..NOISE_SCENES.min(oracle.len())];

    let results = [
        ("oracle closure", oracle_closure(&oracle)),
        ("directional ablation", ablation(&ambiguous, &oracle)),
        ("trace brute-force equivalence", trace_equivalence()),
        ("geometry examples", geometry_examples()),
        ("noise monotonicity", noise_monotonicity(noise_base)),
        ("noise calibration", calibration()),
        ("caption conformance", captions(&[&oracle, &ambiguous])),
        ("determinism and round-trip", determinism_and_round_trip()),
    ];
    let mut failed = 0;
    for (i, (name, r)) in results.iter().enumerate() {
        println!("{} [{}] {}: {}", if r.pass { "PASS" } else { "FAIL" }, i + 1, name, r.detail);
        failed += usize::from(!r.pass);
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        results.len() - failed,
        results.len(),
        t0.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
