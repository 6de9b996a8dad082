//! Grid traversal of a 2D gaze ray against segment masks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::mask::Pixel;
use super::{round_pixel, SceneInput};
use crate::geometry::{Axis, Point2};
use crate::scalar::Scalar;

/// Pixels whose centers lie within this perpendicular distance of the ray
/// line are considered crossed.
pub const CORRIDOR_HALF_WIDTH_PX: f64 = 0.75;

/// First crossing of a segment along a ray.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RayHit<T: Scalar> {
    pub segment_id: u32,
    pub hit_px: Pixel,
    /// Euclidean distance from the eye center to the hit pixel center.
    pub pixel_distance: T,
}

/// Walks the pixel grid from `eye_px` along the unit direction `dir2`, one
/// dominant-axis step at a time, covering every pixel center within
/// [`CORRIDOR_HALF_WIDTH_PX`] of the ray. For each segment the crossed pixel
/// with the smallest forward projection is reported. Segments containing the
/// eye pixel are skipped. Output is sorted by pixel distance, then segment id.
pub fn trace_ray_hits<T: Scalar>(scene: &SceneInput<T>, eye_px: Point2<T>, dir2: Point2<T>) -> Vec<RayHit<T>> {
    let (w, h) = (scene.camera.width, scene.camera.height);
    let eye_pixel = round_pixel(eye_px, w, h);
    let candidates: Vec<usize> = scene
        .segments
        .iter()
        .enumerate()
        .filter(|(_, s)| !eye_pixel.is_some_and(|p| s.mask.contains(p)))
        .map(|(i, _)| i)
        .collect();
    if candidates.is_empty() {
        return Vec::new();
    }

    let axis = if dir2.x.abs() >= dir2.y.abs() { Axis::X } else { Axis::Y };
    let (major_len, minor_len) = match axis {
        Axis::X => (w as i64, h as i64),
        Axis::Y => (h as i64, w as i64),
    };
    let da = dir2.axis(axis);
    let db = match axis {
        Axis::X => dir2.y,
        Axis::Y => dir2.x,
    };
    if da == T::zero() {
        return Vec::new();
    }
    let (ea, eb) = match axis {
        Axis::X => (eye_px.x, eye_px.y),
        Axis::Y => (eye_px.y, eye_px.x),
    };
    let half = T::lit(CORRIDOR_HALF_WIDTH_PX);
    let band = half / da.abs();
    let slope = db / da;
    let step: i64 = if da > T::zero() { 1 } else { -1 };

    // (t, pixel index) per candidate slot
    let mut best: BTreeMap<usize, (T, u32)> = BTreeMap::new();
    let start = ea.round().to_i64().unwrap_or(0) - step;
    let mut i = start;
    loop {
        if (step > 0 && i >= major_len) || (step < 0 && i < 0) {
            break;
        }
        if i >= 0 && i < major_len {
            let center = eb + (T::lit(i as f64) - ea) * slope;
            let lo = (center - band).ceil().max(T::zero());
            let hi = (center + band).floor().min(T::lit(minor_len as f64 - 1.0));
            if lo <= hi {
                let (lo, hi) = (lo.to_i64().unwrap_or(0), hi.to_i64().unwrap_or(-1));
                for j in lo..=hi {
                    let (x, y) = match axis {
                        Axis::X => (i, j),
                        Axis::Y => (j, i),
                    };
                    let off = Point2::new(T::lit(x as f64) - eye_px.x, T::lit(y as f64) - eye_px.y);
                    let t = off.dot(dir2);
                    if !(t > T::zero()) {
                        continue;
                    }
                    let perp = (off.x * dir2.y - off.y * dir2.x).abs();
                    if perp > half {
                        continue;
                    }
                    let idx = (y as u32) * w + x as u32;
                    for &slot in &candidates {
                        if !scene.segments[slot].mask.contains_index(idx) {
                            continue;
                        }
                        let better = match best.get(&slot) {
                            None => true,
                            Some(&(bt, bidx)) => t < bt || (t == bt && idx < bidx),
                        };
                        if better {
                            best.insert(slot, (t, idx));
                        }
                    }
                }
            }
        }
        i += step;
    }

    let mut hits: Vec<RayHit<T>> = best
        .into_iter()
        .map(|(slot, (_, idx))| {
            let p = Pixel::new(idx % w, idx / w);
            let d = Point2::new(T::lit(p.x as f64), T::lit(p.y as f64)).sub(eye_px).norm();
            RayHit {
                segment_id: scene.segments[slot].segment_id,
                hit_px: p,
                pixel_distance: d,
            }
        })
        .collect();
    hits.sort_by(|a, b| {
        a.pixel_distance
            .partial_cmp(&b.pixel_distance)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.segment_id.cmp(&b.segment_id))
    });
    hits
}

/// One pixel inside a segment and inside the ray corridor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorridorPixel<T: Scalar> {
    pub segment_id: u32,
    pub pixel: Pixel,
    /// Forward projection onto the ray direction, in pixels.
    pub t: T,
    pub distance: T,
}

/// Reference scan: tests every mask pixel of every non-self segment against
/// the corridor. Quadratic in mask area; used as an oracle for
/// [`trace_ray_hits`].
pub fn corridor_scan<T: Scalar>(scene: &SceneInput<T>, eye_px: Point2<T>, dir2: Point2<T>) -> Vec<CorridorPixel<T>> {
    let (w, h) = (scene.camera.width, scene.camera.height);
    let eye_pixel = round_pixel(eye_px, w, h);
    let half = T::lit(CORRIDOR_HALF_WIDTH_PX);
    let mut out = Vec::new();
    for s in &scene.segments {
        if eye_pixel.is_some_and(|p| s.mask.contains(p)) {
            continue;
        }
        for p in s.mask.pixels() {
            let off = Point2::new(T::lit(p.x as f64), T::lit(p.y as f64)).sub(eye_px);
            let t = off.dot(dir2);
            let perp = (off.x * dir2.y - off.y * dir2.x).abs();
            if t > T::zero() && perp <= half {
                out.push(CorridorPixel {
                    segment_id: s.segment_id,
                    pixel: p,
                    t,
                    distance: off.norm(),
                });
            }
        }
    }
    out
}

/// [`trace_ray_hits`] computed from [`corridor_scan`].
pub fn trace_ray_hits_exhaustive<T: Scalar>(scene: &SceneInput<T>, eye_px: Point2<T>, dir2: Point2<T>) -> Vec<RayHit<T>> {
    let w = scene.camera.width;
    let mut best: BTreeMap<u32, CorridorPixel<T>> = BTreeMap::new();
    for c in corridor_scan(scene, eye_px, dir2) {
        let idx = |p: Pixel| p.y * w + p.x;
        let better = match best.get(&c.segment_id) {
            None => true,
            Some(b) => c.t < b.t || (c.t == b.t && idx(c.pixel) < idx(b.pixel)),
        };
        if better {
            best.insert(c.segment_id, c);
        }
    }
    let mut hits: Vec<RayHit<T>> = best
        .into_values()
        .map(|c| RayHit {
            segment_id: c.segment_id,
            hit_px: c.pixel,
            pixel_distance: c.distance,
        })
        .collect();
    hits.sort_by(|a, b| {
        a.pixel_distance
            .partial_cmp(&b.pixel_distance)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.segment_id.cmp(&b.segment_id))
    });
    hits
}
