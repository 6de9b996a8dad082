//! Pinhole-camera and gaze-ray arithmetic.
//!
//! Camera frame: X right, Y down, Z forward (away from the camera). Pixel
//! coordinates follow the image convention, with pixel `(i, j)` centered at
//! the integer coordinate `(i, j)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Average human face width in meters, used to convert ear-to-ear pixel
/// distance into a metric scale.
pub const FACE_WIDTH_M: f64 = 0.15;

/// Below this 2D norm a projected gaze direction is treated as degenerate.
pub const EPS_PROJ: f64 = 1e-3;

const UNIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid face: ear-to-ear distance must be positive, got {0}")]
    InvalidFace(f64),
    #[error("invalid camera: {0}")]
    InvalidCamera(&'static str),
    #[error("gaze vector is not unit length (norm {0})")]
    NotUnit(f64),
    #[error("point is behind the camera (z = {0})")]
    BehindCamera(f64),
    #[error("gaze projects onto the optical axis")]
    DegenerateGaze,
    #[error("point coincides with the eye center")]
    CoincidentPoint,
    #[error("point lies behind the eye along the projected gaze")]
    BackwardPoint,
    #[error("gaze ray is parallel to the line of sight through the pixel")]
    ParallelRay,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Point2<T: Scalar> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    /// Component along axis 0 (x) or 1 (y).
    pub fn axis(self, a: Axis) -> T {
        match a {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Point3<T: Scalar> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Point3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn scale(self, k: T) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }
}

/// Image axis used by the similar-triangles depth formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Ideal pinhole camera without distortion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CameraModel<T: Scalar> {
    pub focal_px: T,
    pub principal_point: Point2<T>,
    pub width: u32,
    pub height: u32,
}

impl<T: Scalar> CameraModel<T> {
    pub fn new(focal_px: T, principal_point: Point2<T>, width: u32, height: u32) -> Result<Self, GeometryError> {
        let cam = Self {
            focal_px,
            principal_point,
            width,
            height,
        };
        cam.check()?;
        Ok(cam)
    }

    pub fn check(&self) -> Result<(), GeometryError> {
        if !(self.focal_px > T::zero()) || !self.focal_px.is_finite() {
            return Err(GeometryError::InvalidCamera("focal_px must be positive"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(GeometryError::InvalidCamera("image dimensions must be at least 1"));
        }
        let pp = self.principal_point;
        let inside = pp.x >= T::zero()
            && pp.y >= T::zero()
            && pp.x < T::lit(self.width as f64)
            && pp.y < T::lit(self.height as f64);
        if !inside {
            return Err(GeometryError::InvalidCamera("principal point outside the image"));
        }
        Ok(())
    }

    /// Whether a continuous pixel coordinate rounds to a pixel inside the image.
    pub fn contains(&self, p: Point2<T>) -> bool {
        let half = T::lit(0.5);
        p.x >= -half
            && p.y >= -half
            && p.x < T::lit(self.width as f64) - half
            && p.y < T::lit(self.height as f64) - half
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn cast<U: Scalar>(&self) -> CameraModel<U> {
        CameraModel {
            focal_px: U::lit(self.focal_px.to_f64_lossy()),
            principal_point: Point2::new(
                U::lit(self.principal_point.x.to_f64_lossy()),
                U::lit(self.principal_point.y.to_f64_lossy()),
            ),
            width: self.width,
            height: self.height,
        }
    }
}

/// Unit 3D gaze direction in camera coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GazeVector<T: Scalar> {
    gx: T,
    gy: T,
    gz: T,
}

impl<T: Scalar> GazeVector<T> {
    /// Wraps components that already form a unit vector (within 1e-6).
    pub fn new(gx: T, gy: T, gz: T) -> Result<Self, GeometryError> {
        let norm = (gx * gx + gy * gy + gz * gz).sqrt().to_f64_lossy();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(GeometryError::NotUnit(norm));
        }
        Ok(Self { gx, gy, gz })
    }

    /// Normalizes an arbitrary non-zero direction.
    pub fn normalized(x: T, y: T, z: T) -> Option<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !(n > T::zero()) || !n.is_finite() {
            return None;
        }
        Some(Self {
            gx: x / n,
            gy: y / n,
            gz: z / n,
        })
    }

    pub fn from_point(p: Point3<T>) -> Option<Self> {
        Self::normalized(p.x, p.y, p.z)
    }

    pub fn gx(&self) -> T {
        self.gx
    }

    pub fn gy(&self) -> T {
        self.gy
    }

    pub fn gz(&self) -> T {
        self.gz
    }

    pub fn as_point(&self) -> Point3<T> {
        Point3::new(self.gx, self.gy, self.gz)
    }

    /// Image axis with the larger projected component; ties go to X.
    pub fn dominant_axis(&self) -> Axis {
        if self.gx.abs() >= self.gy.abs() {
            Axis::X
        } else {
            Axis::Y
        }
    }

    pub fn axis(&self, a: Axis) -> T {
        match a {
            Axis::X => self.gx,
            Axis::Y => self.gy,
        }
    }

    pub fn cast<U: Scalar>(&self) -> GazeVector<U> {
        GazeVector {
            gx: U::lit(self.gx.to_f64_lossy()),
            gy: U::lit(self.gy.to_f64_lossy()),
            gz: U::lit(self.gz.to_f64_lossy()),
        }
    }
}

/// Meters per pixel, valid at the depth plane of the face it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PixelScale<T: Scalar> {
    meters_per_pixel: T,
}

impl<T: Scalar> PixelScale<T> {
    pub fn new(meters_per_pixel: T) -> Option<Self> {
        (meters_per_pixel > T::zero() && meters_per_pixel.is_finite()).then_some(Self { meters_per_pixel })
    }

    /// Exact scale of a pinhole camera at depth `depth_m`.
    pub fn at_depth(depth_m: T, focal_px: T) -> Option<Self> {
        Self::new(depth_m / focal_px)
    }

    pub fn meters_per_pixel(&self) -> T {
        self.meters_per_pixel
    }
}

/// Scale at a face from its ear-to-ear width, assuming [`FACE_WIDTH_M`].
pub fn pixel_scale_at_face<T: Scalar>(ear_to_ear_px: T) -> Result<PixelScale<T>, GeometryError> {
    pixel_scale_with_face_width(ear_to_ear_px, T::lit(FACE_WIDTH_M))
}

pub fn pixel_scale_with_face_width<T: Scalar>(ear_to_ear_px: T, face_width_m: T) -> Result<PixelScale<T>, GeometryError> {
    if !(ear_to_ear_px > T::zero()) || !ear_to_ear_px.is_finite() {
        return Err(GeometryError::InvalidFace(ear_to_ear_px.to_f64_lossy()));
    }
    PixelScale::new(face_width_m / ear_to_ear_px).ok_or(GeometryError::InvalidFace(ear_to_ear_px.to_f64_lossy()))
}

/// Result of projecting a 3D gaze onto the image plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GazeProjection<T: Scalar> {
    Direction(Point2<T>),
    Degenerate,
}

impl<T: Scalar> GazeProjection<T> {
    pub fn direction(self) -> Option<Point2<T>> {
        match self {
            GazeProjection::Direction(d) => Some(d),
            GazeProjection::Degenerate => None,
        }
    }
}

pub fn gaze_projection_2d<T: Scalar>(g: &GazeVector<T>) -> GazeProjection<T> {
    let n = g.gx.hypot(g.gy);
    if n < T::lit(EPS_PROJ) {
        return GazeProjection::Degenerate;
    }
    GazeProjection::Direction(Point2::new(g.gx / n, g.gy / n))
}

/// Depth along the 3D gaze ray at an image point, by similar triangles on the
/// dominant image axis: `Z0 + Δa_m · gz / g_a`.
///
/// The metric offset `Δa_m` is the pixel offset from the eye times the scale
/// at the face, so the result is exact only when the ray stays near the face
/// depth plane; see [`ray_depth_perspective`] for the exact back-projection.
pub fn ray_depth_at_pixel<T: Scalar>(
    eye_px: Point2<T>,
    face_depth_m: T,
    g: &GazeVector<T>,
    scale: PixelScale<T>,
    point_px: Point2<T>,
) -> Result<T, GeometryError> {
    let (axis, delta_px) = forward_offset(eye_px, g, point_px)?;
    let delta_m = delta_px * scale.meters_per_pixel;
    Ok(face_depth_m + delta_m * (g.gz / g.axis(axis)))
}

/// Exact depth of the point on the 3D gaze ray whose projection shares the
/// dominant-axis coordinate of `point_px`.
///
/// The head is the back-projection of `eye_px` at `face_depth_m`.
pub fn ray_depth_perspective<T: Scalar>(
    cam: &CameraModel<T>,
    eye_px: Point2<T>,
    face_depth_m: T,
    g: &GazeVector<T>,
    point_px: Point2<T>,
) -> Result<T, GeometryError> {
    let (axis, _) = forward_offset(eye_px, g, point_px)?;
    let c = cam.principal_point.axis(axis);
    let head_a = (eye_px.axis(axis) - c) / cam.focal_px * face_depth_m;
    let u = (point_px.axis(axis) - c) / cam.focal_px;
    let denom = g.axis(axis) - u * g.gz;
    if denom.abs() < T::lit(1e-12) {
        return Err(GeometryError::ParallelRay);
    }
    let t = (u * face_depth_m - head_a) / denom;
    if !(t > T::zero()) {
        return Err(GeometryError::BackwardPoint);
    }
    Ok(face_depth_m + t * g.gz)
}

fn forward_offset<T: Scalar>(eye_px: Point2<T>, g: &GazeVector<T>, point_px: Point2<T>) -> Result<(Axis, T), GeometryError> {
    let dir = gaze_projection_2d(g).direction().ok_or(GeometryError::DegenerateGaze)?;
    let offset = point_px.sub(eye_px);
    if offset.x == T::zero() && offset.y == T::zero() {
        return Err(GeometryError::CoincidentPoint);
    }
    if !(offset.dot(dir) > T::zero()) {
        return Err(GeometryError::BackwardPoint);
    }
    let axis = g.dominant_axis();
    Ok((axis, offset.axis(axis)))
}

pub fn project_world_point<T: Scalar>(cam: &CameraModel<T>, p: Point3<T>) -> Result<Point2<T>, GeometryError> {
    if !(p.z > T::zero()) {
        return Err(GeometryError::BehindCamera(p.z.to_f64_lossy()));
    }
    Ok(Point2::new(
        cam.principal_point.x + cam.focal_px * p.x / p.z,
        cam.principal_point.y + cam.focal_px * p.y / p.z,
    ))
}

/// Inverse of [`project_world_point`] for a known depth.
pub fn back_project<T: Scalar>(cam: &CameraModel<T>, px: Point2<T>, depth: T) -> Point3<T> {
    Point3::new(
        (px.x - cam.principal_point.x) / cam.focal_px * depth,
        (px.y - cam.principal_point.y) / cam.focal_px * depth,
        depth,
    )
}

/// Angle between two unit gaze vectors, in degrees within `[0, 180]`.
pub fn angular_error_deg<T: Scalar>(a: &GazeVector<T>, b: &GazeVector<T>) -> T {
    let c = a.as_point().dot(b.as_point()).max(-T::one()).min(T::one());
    c.acos().to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(x: f64, y: f64, z: f64) -> GazeVector<f64> {
        GazeVector::normalized(x, y, z).unwrap()
    }

    fn p2(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    #[test]
    fn pixel_scale_examples() {
        assert_eq!(pixel_scale_at_face(50.0).unwrap().meters_per_pixel(), 0.15 / 50.0);
        assert!((pixel_scale_at_face(50.0f64).unwrap().meters_per_pixel() - 0.003).abs() < 1e-15);
        assert!((pixel_scale_at_face(150.0f64).unwrap().meters_per_pixel() - 0.001).abs() < 1e-15);
        assert_eq!(pixel_scale_at_face(0.0f64), Err(GeometryError::InvalidFace(0.0)));
        assert!(pixel_scale_at_face(-3.0f64).is_err());
        assert!(pixel_scale_with_face_width(50.0f64, 0.0).is_err());
    }

    #[test]
    fn projection_examples() {
        assert_eq!(gaze_projection_2d(&g(0.6, 0.0, 0.8)), GazeProjection::Direction(p2(1.0, 0.0)));
        assert_eq!(gaze_projection_2d(&g(0.0, -0.6, 0.8)), GazeProjection::Direction(p2(0.0, -1.0)));
        assert_eq!(gaze_projection_2d(&g(0.0, 0.0, 1.0)), GazeProjection::Degenerate);
        // just under the threshold
        assert_eq!(gaze_projection_2d(&g(0.0009, 0.0, 1.0)), GazeProjection::Degenerate);
    }

    #[test]
    fn ray_depth_examples() {
        let s = PixelScale::new(0.003).unwrap();
        let eye = p2(200.0, 100.0);
        let a = GazeVector::new(0.5f64.sqrt(), 0.0, 0.5f64.sqrt()).unwrap();
        let d = ray_depth_at_pixel(eye, 2.0, &a, s, p2(300.0, 100.0)).unwrap();
        assert!((d - 2.3).abs() < 1e-9, "{d}");
        let b = GazeVector::new(0.6, 0.0, -0.8).unwrap();
        let d = ray_depth_at_pixel(eye, 2.0, &b, s, p2(300.0, 100.0)).unwrap();
        assert!((d - 1.6).abs() < 1e-9, "{d}");
        let c = GazeVector::new(0.0, 0.6, 0.8).unwrap();
        let d = ray_depth_at_pixel(eye, 2.0, &c, s, p2(200.0, 150.0)).unwrap();
        assert!((d - 2.2).abs() < 1e-9, "{d}");
    }

    #[test]
    fn ray_depth_preconditions() {
        let s = PixelScale::new(0.003).unwrap();
        let eye = p2(200.0, 100.0);
        let a = g(1.0, 0.0, 1.0);
        assert_eq!(ray_depth_at_pixel(eye, 2.0, &a, s, eye), Err(GeometryError::CoincidentPoint));
        assert_eq!(ray_depth_at_pixel(eye, 2.0, &a, s, p2(100.0, 100.0)), Err(GeometryError::BackwardPoint));
        let axial = g(0.0, 0.0, 1.0);
        assert_eq!(ray_depth_at_pixel(eye, 2.0, &axial, s, p2(300.0, 100.0)), Err(GeometryError::DegenerateGaze));
    }

    #[test]
    fn world_projection() {
        let cam = CameraModel::new(500.0, p2(320.0, 240.0), 640, 480).unwrap();
        assert_eq!(project_world_point(&cam, Point3::new(0.3, 0.0, 2.0)).unwrap(), p2(395.0, 240.0));
        assert_eq!(project_world_point(&cam, Point3::new(0.0, 0.0, 1.0)).unwrap(), p2(320.0, 240.0));
        assert_eq!(
            project_world_point(&cam, Point3::new(0.0, 0.0, -1.0)),
            Err(GeometryError::BehindCamera(-1.0))
        );
    }

    #[test]
    fn camera_validation() {
        assert!(CameraModel::new(0.0, p2(1.0, 1.0), 4, 4).is_err());
        assert!(CameraModel::new(10.0, p2(1.0, 1.0), 0, 4).is_err());
        assert!(CameraModel::new(10.0, p2(4.0, 1.0), 4, 4).is_err());
        assert!(CameraModel::new(10.0, p2(3.9, 0.0), 4, 4).is_ok());
    }

    #[test]
    fn angular_error_examples() {
        let x = g(1.0, 0.0, 0.0);
        assert_eq!(angular_error_deg(&x, &x), 0.0);
        assert!((angular_error_deg(&x, &g(0.0, 1.0, 0.0)) - 90.0).abs() < 1e-12);
        assert!((angular_error_deg(&g(0.0, 0.0, 1.0), &g(0.0, 0.0, -1.0)) - 180.0).abs() < 1e-12);
    }

    #[test]
    fn unit_check() {
        assert!(GazeVector::new(1.0f64, 0.0, 0.0).is_ok());
        assert!(GazeVector::new(1.0f64, 0.01, 0.0).is_err());
        assert!(GazeVector::normalized(0.0f64, 0.0, 0.0).is_none());
    }

    #[test]
    fn f32_matches_f64() {
        let s64 = PixelScale::new(0.003f64).unwrap();
        let s32 = PixelScale::new(0.003f32).unwrap();
        let g64 = GazeVector::new(0.6f64, 0.0, 0.8).unwrap();
        let g32 = g64.cast::<f32>();
        let a = ray_depth_at_pixel(p2(200.0, 100.0), 2.0, &g64, s64, p2(300.0, 100.0)).unwrap();
        let b = ray_depth_at_pixel(Point2::new(200.0f32, 100.0), 2.0, &g32, s32, Point2::new(300.0, 100.0)).unwrap();
        assert!((a - b as f64).abs() < 1e-5);
    }

    fn unit3() -> impl Strategy<Value = GazeVector<f64>> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("non-zero", |(x, y, z)| x * x + y * y + z * z > 1e-3)
            .prop_map(|(x, y, z)| g(x, y, z))
    }

    proptest! {
        #[test]
        fn ray_depth_is_linear_in_offset(gaze in unit3(), off in 1.0f64..300.0, z0 in 0.5f64..10.0, mpp in 1e-4f64..0.01) {
            prop_assume!(gaze.gx().hypot(gaze.gy()) >= EPS_PROJ);
            let dir = gaze_projection_2d(&gaze).direction().unwrap();
            let eye = p2(100.0, 100.0);
            let at = |k: f64| p2(eye.x + dir.x * off * k, eye.y + dir.y * off * k);
            let s = PixelScale::new(mpp).unwrap();
            let d1 = ray_depth_at_pixel(eye, z0, &gaze, s, at(1.0)).unwrap() - z0;
            let d2 = ray_depth_at_pixel(eye, z0, &gaze, s, at(2.0)).unwrap() - z0;
            prop_assert!((d2 - 2.0 * d1).abs() <= 1e-9 * (1.0 + d1.abs()));
            let s3 = PixelScale::new(3.0 * mpp).unwrap();
            let d3 = ray_depth_at_pixel(eye, z0, &gaze, s3, at(1.0)).unwrap() - z0;
            prop_assert!((d3 - 3.0 * d1).abs() <= 1e-9 * (1.0 + d1.abs()));
        }

        #[test]
        fn lateral_gaze_keeps_face_depth(theta in 0.0f64..std::f64::consts::TAU, off in 1.0f64..300.0, z0 in 0.5f64..10.0) {
            let gaze = GazeVector::new(theta.cos(), theta.sin(), 0.0).unwrap();
            let eye = p2(50.0, 60.0);
            let pt = p2(eye.x + theta.cos() * off, eye.y + theta.sin() * off);
            let d = ray_depth_at_pixel(eye, z0, &gaze, PixelScale::new(0.002).unwrap(), pt).unwrap();
            prop_assert_eq!(d, z0);
        }

        #[test]
        fn perspective_depth_recovers_world_point(
            hx in -1.0f64..1.0, hy in -0.7f64..0.7, hz in 1.0f64..6.0,
            gaze in unit3(), t in 0.05f64..3.0,
        ) {
            let cam = CameraModel::new(500.0, p2(320.0, 240.0), 640, 480).unwrap();
            prop_assume!(gaze.axis(gaze.dominant_axis()).abs() >= 0.1);
            let head = Point3::new(hx, hy, hz);
            let q = head.add(gaze.as_point().scale(t));
            prop_assume!(q.z > 0.2);
            let eye = project_world_point(&cam, head).unwrap();
            let qp = project_world_point(&cam, q).unwrap();
            // The image of the 3D ray is a line from the eye through qp; only
            // points on the forward side of the projected gaze are defined.
            let dir = gaze_projection_2d(&gaze).direction().unwrap();
            prop_assume!(qp.sub(eye).dot(dir) > 1e-6);
            let a = gaze.dominant_axis();
            prop_assume!((qp.axis(a) - eye.axis(a)).abs() > 1e-6);
            let d = ray_depth_perspective(&cam, eye, hz, &gaze, qp).unwrap();
            prop_assert!((d - q.z).abs() <= 1e-6 * (1.0 + q.z.abs()), "{} vs {}", d, q.z);
            let back = project_world_point(&cam, back_project(&cam, qp, q.z)).unwrap();
            prop_assert!(back.sub(qp).norm() < 1e-6);
        }

        #[test]
        fn face_scale_formula_is_exact_for_lateral_gaze(
            hx in -1.0f64..1.0, hz in 1.0f64..6.0, theta in 0.0f64..std::f64::consts::TAU, t in 0.05f64..2.0,
        ) {
            let cam = CameraModel::new(500.0, p2(320.0, 240.0), 640, 480).unwrap();
            let gaze = GazeVector::new(theta.cos(), theta.sin(), 0.0).unwrap();
            prop_assume!(gaze.axis(gaze.dominant_axis()).abs() >= 0.1);
            let head = Point3::new(hx, 0.1, hz);
            let q = head.add(gaze.as_point().scale(t));
            let eye = project_world_point(&cam, head).unwrap();
            let qp = project_world_point(&cam, q).unwrap();
            let s = PixelScale::at_depth(hz, cam.focal_px).unwrap();
            let d = ray_depth_at_pixel(eye, hz, &gaze, s, qp).unwrap();
            prop_assert!((d - q.z).abs() <= 1e-6 * (1.0 + q.z.abs()));
        }

        #[test]
        fn angular_error_metric(a in unit3(), b in unit3(), c in unit3()) {
            let ab = angular_error_deg(&a, &b);
            prop_assert!((ab - angular_error_deg(&b, &a)).abs() <= 1e-9);
            prop_assert!((0.0..=180.0).contains(&ab));
            prop_assert!(angular_error_deg(&a, &c) <= ab + angular_error_deg(&b, &c) + 1e-9);
        }
    }
}
