//! `jointgaze`: detect joint attention in scene bundles, generate synthetic
//! datasets, evaluate them, and draw overlays.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jointgaze::detect::{Mode, DEFAULT_DEPTH_TOLERANCE_M};
use jointgaze::geometry::FACE_WIDTH_M;

#[derive(Parser, Debug)]
#[command(name = "jointgaze", version, about = "Compositional joint visual attention detector")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct DetectorArgs {
    /// Detection scheme: 3d uses depth matching, 2d takes the first crossing.
    #[arg(long, default_value = "3d")]
    pub mode: Mode,
    /// Depth tolerance in meters.
    #[arg(long, default_value_t = DEFAULT_DEPTH_TOLERANCE_M)]
    pub tolerance: f64,
    /// Assumed ear-to-ear face width in meters.
    #[arg(long, default_value_t = FACE_WIDTH_M)]
    pub face_width: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analyze a scene bundle, or every scene of a dataset directory.
    Detect {
        /// Scene manifest (.json) or dataset directory.
        input: std::path::PathBuf,
        #[command(flatten)]
        detector: DetectorArgs,
        /// Report file (single scene) or report directory (dataset).
        /// A single report goes to stdout when omitted.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        /// Also write an SVG overlay next to each report.
        #[arg(long)]
        overlay: bool,
    },
    /// Generate a seeded synthetic dataset.
    Simulate(commands::SimulateArgs),
    /// Evaluate a dataset against its ground truth.
    Eval {
        dataset: std::path::PathBuf,
        #[command(flatten)]
        detector: DetectorArgs,
        /// Evaluate both modes on the same scenes.
        #[arg(long)]
        ablation: bool,
        /// Score reports previously written by `detect` instead of rerunning.
        #[arg(long, conflicts_with = "ablation")]
        reports: Option<std::path::PathBuf>,
        /// Output directory for summary files (default: <dataset>/eval).
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Draw a scene and its report as SVG.
    Overlay {
        scene: std::path::PathBuf,
        report: std::path::PathBuf,
        /// SVG path; stdout when omitted.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = commands::configure_threads().and_then(|()| match cli.command {
        Command::Detect {
            input,
            detector,
            out,
            overlay,
        } => commands::detect(&input, &detector, out.as_deref(), overlay),
        Command::Simulate(args) => commands::simulate(&args),
        Command::Eval {
            dataset,
            detector,
            ablation,
            reports,
            out,
        } => commands::eval(&dataset, &detector, ablation, reports.as_deref(), out.as_deref()),
        Command::Overlay { scene, report, out } => commands::overlay(&scene, &report, out.as_deref()),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if commands::is_internal(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
