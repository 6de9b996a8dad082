//! SVG overlay of a scene and its report, in image pixel coordinates.
//!
//! Segment outlines are grey, gaze rays red (a dot for faces whose gaze
//! has no image-plane direction), event targets green, captions at the top.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::attention::SceneReport;
use crate::geometry::{gaze_projection_2d, Point2};
use crate::scalar::Scalar;
use crate::scene::{Mask, SceneInput};

pub const GAZE_COLOR: &str = "#ff0000";
pub const TARGET_COLOR: &str = "#00c000";
pub const SEGMENT_COLOR: &str = "#808080";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OverlayError {
    #[error("report is for scene {report}, not {scene}")]
    SceneMismatch { scene: String, report: String },
    #[error("report faces {report:?} differ from scene faces {scene:?}")]
    FaceMismatch { scene: Vec<u32>, report: Vec<u32> },
    #[error("report event refers to unknown segment {0}")]
    UnknownSegment(u32),
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Path data tracing the pixel-edge boundary of a mask, one subpath per
/// maximal straight edge run.
pub fn outline_path(mask: &Mask) -> String {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let dense = mask.to_dense();
    let at = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && dense[(y * w + x) as usize];
    let mut d = String::new();
    // horizontal edges between rows y-1 and y
    for y in 0..=h {
        let mut x = 0;
        while x < w {
            if at(x, y - 1) != at(x, y) {
                let start = x;
                while x < w && at(x, y - 1) != at(x, y) {
                    x += 1;
                }
                let _ = write!(d, "M{} {}H{}", start as f64 - 0.5, y as f64 - 0.5, x as f64 - 0.5);
            } else {
                x += 1;
            }
        }
    }
    // vertical edges between columns x-1 and x
    for x in 0..=w {
        let mut y = 0;
        while y < h {
            if at(x - 1, y) != at(x, y) {
                let start = y;
                while y < h && at(x - 1, y) != at(x, y) {
                    y += 1;
                }
                let _ = write!(d, "M{} {}V{}", x as f64 - 0.5, start as f64 - 0.5, y as f64 - 0.5);
            } else {
                y += 1;
            }
        }
    }
    d
}

/// Where a ray from `p` along `dir` leaves the image rectangle.
fn exit_point(p: Point2<f64>, dir: Point2<f64>, w: f64, h: f64) -> Point2<f64> {
    let limit = |e: f64, d: f64, hi: f64| {
        if d > 0.0 {
            (hi - 0.5 - e) / d
        } else if d < 0.0 {
            (-0.5 - e) / d
        } else {
            f64::INFINITY
        }
    };
    let t = limit(p.x, dir.x, w).min(limit(p.y, dir.y, h)).max(0.0);
    Point2::new(p.x + t * dir.x, p.y + t * dir.y)
}

pub fn render_overlay<T: Scalar>(scene: &SceneInput<T>, report: &SceneReport<T>) -> Result<String, OverlayError> {
    if scene.scene_id != report.scene_id {
        return Err(OverlayError::SceneMismatch {
            scene: scene.scene_id.clone(),
            report: report.scene_id.clone(),
        });
    }
    let scene_faces: BTreeSet<u32> = scene.faces.iter().map(|f| f.face_id).collect();
    let report_faces: BTreeSet<u32> = report.faces.iter().map(|f| f.face_id).collect();
    if scene_faces != report_faces {
        return Err(OverlayError::FaceMismatch {
            scene: scene_faces.into_iter().collect(),
            report: report_faces.into_iter().collect(),
        });
    }
    for e in &report.events {
        if scene.segment(e.segment_id).is_none() {
            return Err(OverlayError::UnknownSegment(e.segment_id));
        }
    }

    let (w, h) = (scene.camera.width, scene.camera.height);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="-0.5 -0.5 {w} {h}">"#
    );
    let _ = writeln!(s, "<title>{}</title>", escape(&scene.scene_id));
    let _ = writeln!(s, r#"<g fill="none" stroke="{SEGMENT_COLOR}" stroke-width="1">"#);
    for seg in &scene.segments {
        let _ = writeln!(
            s,
            r#"<path class="segment" data-segment="{}" d="{}"/>"#,
            seg.segment_id,
            outline_path(&seg.mask)
        );
    }
    s.push_str("</g>\n");

    let _ = writeln!(s, r#"<g fill="none" stroke="{TARGET_COLOR}" stroke-width="2">"#);
    for e in &report.events {
        let seg = scene.segment(e.segment_id).expect("checked above");
        let _ = writeln!(
            s,
            r#"<path class="target" data-segment="{}" d="{}"/>"#,
            e.segment_id,
            outline_path(&seg.mask)
        );
    }
    s.push_str("</g>\n");

    let mut faces: Vec<_> = scene.faces.iter().collect();
    faces.sort_by_key(|f| f.face_id);
    let _ = writeln!(s, r#"<g stroke="{GAZE_COLOR}" fill="{GAZE_COLOR}" stroke-width="2">"#);
    for f in faces {
        let eye = Point2::new(f.eye_center_px.x.to_f64_lossy(), f.eye_center_px.y.to_f64_lossy());
        match gaze_projection_2d(&f.gaze.cast::<f64>()).direction() {
            Some(dir) => {
                let end = exit_point(eye, dir, w as f64, h as f64);
                let _ = writeln!(
                    s,
                    r#"<line class="gaze" data-face="{}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
                    f.face_id, eye.x, eye.y, end.x, end.y
                );
            }
            None => {
                let _ = writeln!(
                    s,
                    r#"<circle class="gaze-dot" data-face="{}" cx="{:.2}" cy="{:.2}" r="3"/>"#,
                    f.face_id, eye.x, eye.y
                );
            }
        }
    }
    s.push_str("</g>\n");

    for (i, c) in report.captions.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text class="caption" x="4" y="{}" font-family="sans-serif" font-size="14" fill="{TARGET_COLOR}">{}</text>"#,
            16 + 18 * i,
            escape(c)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
