use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::geometry::{GazeVector, Point3};
use crate::scalar::Scalar;
use crate::scene::SceneInput;

/// Perturbed depths never drop below this.
const MIN_DEPTH_M: f32 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub gaze_sigma_deg: f64,
    pub depth_sigma_m: f64,
    pub mask_jitter_px: u32,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn check(&self) -> Result<(), SimError> {
        if !(self.gaze_sigma_deg >= 0.0 && self.gaze_sigma_deg.is_finite()) {
            return Err(SimError::Params("gaze_sigma_deg must be >= 0".into()));
        }
        if !(self.depth_sigma_m >= 0.0 && self.depth_sigma_m.is_finite()) {
            return Err(SimError::Params("depth_sigma_m must be >= 0".into()));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.gaze_sigma_deg == 0.0 && self.depth_sigma_m == 0.0 && self.mask_jitter_px == 0
    }
}

/// Rotates `g` by `|N(0, sigma)|` degrees about a uniformly random axis
/// orthogonal to it. Always consumes the same draws, so for a fixed stream
/// the rotation angle scales linearly with `sigma_deg`.
pub fn perturb_gaze<R: Rng + ?Sized>(g: &GazeVector<f64>, sigma_deg: f64, rng: &mut R) -> GazeVector<f64> {
    let z: f64 = StandardNormal.sample(rng);
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    if sigma_deg == 0.0 {
        return *g;
    }
    let v = g.as_point();
    // any vector not parallel to v seeds the orthonormal basis
    let seed = if v.x.abs() < 0.9 {
        Point3::new(1.0, 0.0, 0.0)
    } else {
        Point3::new(0.0, 1.0, 0.0)
    };
    let e1 = v.cross(seed);
    let e1 = e1.scale(1.0 / e1.norm());
    let e2 = v.cross(e1);
    let axis = e1.scale(phi.cos()).add(e2.scale(phi.sin()));
    let theta = (z.abs() * sigma_deg).to_radians();
    let r = v.scale(theta.cos()).add(axis.cross(v).scale(theta.sin()));
    GazeVector::from_point(r).expect("rotation preserves length")
}

/// Seeded gaze, depth and mask perturbation. Each noise source draws from
/// its own stream, so enabling one does not change the others.
pub fn apply_noise<T: Scalar>(scene: &SceneInput<T>, spec: &NoiseSpec) -> Result<SceneInput<T>, SimError> {
    spec.check()?;
    let mut out = scene.clone();
    if spec.is_zero() {
        return Ok(out);
    }
    let stream = |s: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(spec.seed);
        r.set_stream(s);
        r
    };

    if spec.gaze_sigma_deg > 0.0 {
        let mut rng = stream(1);
        for f in &mut out.faces {
            let g = perturb_gaze(&f.gaze.cast::<f64>(), spec.gaze_sigma_deg, &mut rng);
            f.gaze = g.cast();
        }
    }

    if spec.depth_sigma_m > 0.0 {
        let mut rng = stream(2);
        let n = Normal::new(0.0, spec.depth_sigma_m).expect("finite sigma");
        for d in out.depth.values_mut() {
            let v = *d as f64 + n.sample(&mut rng);
            *d = (v as f32).max(MIN_DEPTH_M);
        }
    }

    if spec.mask_jitter_px > 0 {
        let mut rng = stream(3);
        let j = spec.mask_jitter_px as i64;
        for s in &mut out.segments {
            let r = rng.random_range(-j..=j);
            if r > 0 {
                s.mask = s.mask.dilate(r as u32);
            } else if r < 0 {
                let eroded = s.mask.erode((-r) as u32);
                if !eroded.is_empty() {
                    s.mask = eroded;
                }
            }
        }
    }
    Ok(out)
}
