use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;

use jointgaze::attention::analyze_scene;
use jointgaze::dataset::{
    generate_dataset, read_dataset, read_manifest, scene_path, write_dataset, DatasetParams, SceneRecord,
};
use jointgaze::detect::{DetectorConfig, Mode};
use jointgaze::eval::{evaluate_dataset, rows_to_csv, run_ablation, score_scene, summarize, EvalSummary};
use jointgaze::overlay::render_overlay;
use jointgaze::scene::read_scene_bundle;
use jointgaze::sim::{NoiseSpec, SampleParams};
use jointgaze::{Config, Report, Scene};

use crate::DetectorArgs;

pub const THREADS_ENV: &str = "JOINTGAZE_THREADS";

/// Marks a failure of an internal invariant rather than of the input.
#[derive(Debug)]
pub struct Internal(pub String);

impl fmt::Display for Internal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "internal error: {}", self.0)
    }
}

impl std::error::Error for Internal {}

pub fn is_internal(e: &anyhow::Error) -> bool {
    e.chain().any(|c| c.is::<Internal>())
}

pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .with_context(|| format!("{THREADS_ENV} must be a positive integer, got '{v}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Internal(e.to_string()))?;
    Ok(())
}

fn config(args: &DetectorArgs) -> Result<Config> {
    let c = DetectorConfig {
        depth_tolerance_m: args.tolerance,
        mode: args.mode,
        face_width_m: args.face_width,
    };
    c.check()?;
    Ok(c)
}

/// Writes through a temporary sibling and a rename.
fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn describe(report: &Report) -> String {
    if report.captions.is_empty() {
        format!("{}: no joint attention", report.scene_id)
    } else {
        format!("{}: {}", report.scene_id, report.captions.join("; "))
    }
}

pub fn detect(input: &Path, args: &DetectorArgs, out: Option<&Path>, overlay: bool) -> Result<()> {
    let cfg = config(args)?;
    if input.is_dir() {
        return detect_dataset(input, &cfg, out, overlay);
    }
    if overlay && out.is_none() {
        bail!("--overlay needs --out to place the SVG next to the report");
    }
    let scene: Scene = read_scene_bundle(input).with_context(|| format!("reading {}", input.display()))?;
    let report = analyze_scene(&scene, &cfg)?;
    match out {
        Some(path) => {
            write_file(path, report.to_json().as_bytes())?;
            if overlay {
                let svg = render_overlay(&scene, &report).map_err(|e| Internal(e.to_string()))?;
                write_file(&path.with_extension("svg"), svg.as_bytes())?;
            }
            println!("{}", describe(&report));
        }
        None => print!("{}", report.to_json()),
    }
    Ok(())
}

/// Report directory used by `detect` on a dataset when `--out` is omitted.
pub fn default_report_dir(dataset: &Path, mode: Mode) -> PathBuf {
    dataset.join("reports").join(mode.as_str())
}

fn detect_dataset(dir: &Path, cfg: &Config, out: Option<&Path>, overlay: bool) -> Result<()> {
    let manifest = read_manifest(dir)?;
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| default_report_dir(dir, cfg.mode));
    let n_events: usize = manifest
        .scene_ids
        .par_iter()
        .map(|id| -> Result<usize> {
            let path = scene_path(dir, id);
            let scene: Scene = read_scene_bundle(&path).with_context(|| format!("reading {}", path.display()))?;
            let report = analyze_scene(&scene, cfg)?;
            write_file(&out.join(format!("{id}.json")), report.to_json().as_bytes())?;
            if overlay {
                let svg = render_overlay(&scene, &report).map_err(|e| Internal(e.to_string()))?;
                write_file(&out.join(format!("{id}.svg")), svg.as_bytes())?;
            }
            Ok(report.events.len())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    println!(
        "wrote {} reports ({} events) to {}",
        manifest.scene_ids.len(),
        n_events,
        out.display()
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Number of scenes.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Probability that a scene has a shared target.
    #[arg(long, default_value_t = 0.5)]
    pub p_joint: f64,
    #[arg(long, default_value_t = 3)]
    pub agents: usize,
    #[arg(long, default_value_t = 4)]
    pub objects: usize,
    /// Place a depth-mismatched distractor on every participant's ray.
    #[arg(long)]
    pub ambiguity: bool,
    #[arg(long, default_value_t = 0.0)]
    pub gaze_noise_deg: f64,
    #[arg(long, default_value_t = 0.0)]
    pub depth_noise_m: f64,
    #[arg(long, default_value_t = 0)]
    pub mask_jitter_px: u32,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let params = DatasetParams {
        n_scenes: args.n,
        seed: args.seed,
        sample: SampleParams {
            n_agents: args.agents,
            n_objects: args.objects,
            p_joint: args.p_joint,
            ambiguity: args.ambiguity,
            ..Default::default()
        },
        noise: NoiseSpec {
            gaze_sigma_deg: args.gaze_noise_deg,
            depth_sigma_m: args.depth_noise_m,
            mask_jitter_px: args.mask_jitter_px,
            seed: 0,
        },
    };
    let records = generate_dataset(&params)?;
    let m = write_dataset(&args.out, &params, &records)?;
    println!(
        "wrote {} scenes ({} positive, {} negative) to {}",
        m.n_scenes,
        m.n_positive,
        m.n_negative,
        args.out.display()
    );
    Ok(())
}

fn fmt_iou(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"))
}

pub fn headline(s: &EvalSummary) -> String {
    format!(
        "{}: mean IOU {}, agent acc {:.3}, JA acc {:.3} ({} scenes, {} positive)",
        s.mode,
        fmt_iou(s.mean_target_iou),
        s.agent_accuracy,
        s.ja_classification_accuracy,
        s.n_scenes,
        s.n_positive
    )
}

fn csv(s: &EvalSummary) -> Result<String> {
    rows_to_csv(&s.rows).map_err(|e| Internal(e.to_string()).into())
}

pub fn eval(
    dataset: &Path,
    args: &DetectorArgs,
    ablation: bool,
    reports: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let cfg = config(args)?;
    let records = read_dataset(dataset)?;
    let pairs: Vec<_> = records.iter().map(|r| (&r.scene, &r.truth)).collect();
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| dataset.join("eval"));
    if ablation {
        let pair = run_ablation(&pairs, &cfg)?;
        write_file(&out.join("ablation.json"), pair.to_json().as_bytes())?;
        write_file(&out.join("rows_3d.csv"), csv(&pair.three_d)?.as_bytes())?;
        write_file(&out.join("rows_2d.csv"), csv(&pair.two_d)?.as_bytes())?;
        println!("{}", headline(&pair.three_d));
        println!("{}", headline(&pair.two_d));
        return Ok(());
    }
    let summary = match reports {
        Some(dir) => score_reports(&records, dir, cfg.mode)?,
        None => evaluate_dataset(&pairs, &cfg)?,
    };
    write_file(&out.join("summary.json"), summary.to_json().as_bytes())?;
    write_file(&out.join("rows.csv"), csv(&summary)?.as_bytes())?;
    println!("{}", headline(&summary));
    Ok(())
}

fn score_reports(records: &[SceneRecord], dir: &Path, mode: Mode) -> Result<EvalSummary> {
    let rows = records
        .par_iter()
        .map(|r| -> Result<_> {
            let path = dir.join(format!("{}.json", r.scene.scene_id));
            let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
            let report = Report::from_json(&bytes).with_context(|| format!("parsing {}", path.display()))?;
            Ok(score_scene(&report, &r.scene, &r.truth, mode)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(mode, rows)?)
}

pub fn overlay(scene_path: &Path, report_path: &Path, out: Option<&Path>) -> Result<()> {
    let scene: Scene = read_scene_bundle(scene_path).with_context(|| format!("reading {}", scene_path.display()))?;
    let bytes = fs::read(report_path).with_context(|| format!("reading {}", report_path.display()))?;
    let report = Report::from_json(&bytes).with_context(|| format!("parsing {}", report_path.display()))?;
    let svg = render_overlay(&scene, &report)?;
    match out {
        Some(p) => write_file(p, svg.as_bytes())?,
        None => print!("{svg}"),
    }
    Ok(())
}
