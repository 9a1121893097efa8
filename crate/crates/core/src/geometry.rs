//! Value types for end-effector trajectories and pinhole projection into
//! pixel space.
//!
//! Positions live in the robot base frame (meters). A [`CameraModel`] maps a
//! base-frame point into the camera frame with a rigid transform and then
//! through a distortion-free pinhole. The camera and robot base are assumed
//! static over an episode, so one model serves every step.

use std::ops::{Add, Mul, Sub};

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Points with camera-frame depth at or below this are rejected.
pub const MIN_DEPTH: f64 = 1e-6;

const QUATERNION_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point is behind the camera (depth {depth})")]
    BehindCamera { depth: f64 },
    #[error("step index {index} out of range for episode of length {len}")]
    InvalidIndex { index: usize, len: usize },
    #[error("invalid height range: max {max} must exceed min {min}")]
    InvalidRange { min: f64, max: f64 },
    #[error("every step of the episode projects behind the camera")]
    EmptyResult,
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("invalid episode: {0}")]
    InvalidEpisode(String),
}

/// A point or displacement in the robot base frame, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Euclidean distance. The summation order is fixed so that every
    /// caller sees bit-identical values for identical inputs.
    pub fn distance(self, other: Vec3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    /// Point at fraction `t` of the way from `self` to `other`.
    pub fn lerp(self, other: Vec3, t: f64) -> Vec3 {
        Vec3::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
            self.z + (other.z - self.z) * t,
        )
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

/// On-disk form of a camera calibration. Validated into [`CameraModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraFile {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Base-to-camera rotation as `[w, x, y, z]`.
    pub quaternion: [f64; 4],
    /// Base-to-camera translation `[x, y, z]` in meters.
    pub translation: [f64; 3],
    pub width: u32,
    pub height: u32,
}

/// Pinhole intrinsics plus the static base-to-camera extrinsics.
///
/// A base-frame point `p` maps to the camera frame as `R·p + t`, then to
/// pixels as `u = fx·X/Z + cx`, `v = fy·Y/Z + cy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CameraFile", into = "CameraFile")]
pub struct CameraModel {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    rotation: UnitQuaternion<f64>,
    quaternion: [f64; 4],
    translation: Vec3,
    width: u32,
    height: u32,
}

impl CameraModel {
    /// Identity extrinsics (camera frame equals base frame).
    pub fn from_intrinsics(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self, GeometryError> {
        Self::new(fx, fy, cx, cy, [1.0, 0.0, 0.0, 0.0], Vec3::ZERO, width, height)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        quaternion_wxyz: [f64; 4],
        translation: Vec3,
        width: u32,
        height: u32,
    ) -> Result<Self, GeometryError> {
        let invalid = |msg: String| Err(GeometryError::InvalidCamera(msg));
        if !(fx > 0.0 && fx.is_finite() && fy > 0.0 && fy.is_finite()) {
            return invalid(format!("focal lengths must be positive, got fx={fx} fy={fy}"));
        }
        if !(cx.is_finite() && cy.is_finite()) || !translation.is_finite() {
            return invalid("principal point and translation must be finite".into());
        }
        if width < 1 || height < 1 {
            return invalid(format!("image size must be at least 1x1, got {width}x{height}"));
        }
        let [w, x, y, z] = quaternion_wxyz;
        let q = Quaternion::new(w, x, y, z);
        let norm = q.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > QUATERNION_NORM_TOL {
            return invalid(format!("rotation quaternion must have unit norm, got {norm}"));
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            rotation: UnitQuaternion::new_unchecked(q),
            quaternion: quaternion_wxyz,
            translation,
            width,
            height,
        })
    }

    pub fn fx(&self) -> f64 {
        self.fx
    }
    pub fn fy(&self) -> f64 {
        self.fy
    }
    pub fn cx(&self) -> f64 {
        self.cx
    }
    pub fn cy(&self) -> f64 {
        self.cy
    }
    pub fn width(&self) -> u32 {
        self.width
    }
    pub fn height(&self) -> u32 {
        self.height
    }
    pub fn translation(&self) -> Vec3 {
        self.translation
    }
    pub fn quaternion_wxyz(&self) -> [f64; 4] {
        self.quaternion
    }

    /// Base frame to camera frame.
    pub fn to_camera_frame(&self, p: Vec3) -> Vec3 {
        Vec3::from_vector(&(self.rotation * p.to_vector())) + self.translation
    }

    /// Camera frame to base frame.
    pub fn to_base_frame(&self, p_cam: Vec3) -> Vec3 {
        Vec3::from_vector(&(self.rotation.inverse() * (p_cam - self.translation).to_vector()))
    }

    /// Project a base-frame point to subpixel coordinates. The result may lie
    /// outside the image; clipping happens at raster time.
    pub fn project_point(&self, p: Vec3) -> Result<(f64, f64), GeometryError> {
        let c = self.to_camera_frame(p);
        if !(c.z > MIN_DEPTH) {
            return Err(GeometryError::BehindCamera { depth: c.z });
        }
        Ok((self.fx * c.x / c.z + self.cx, self.fy * c.y / c.z + self.cy))
    }

    /// Lift a pixel with known camera-frame depth back to the base frame.
    pub fn unproject(&self, u: f64, v: f64, depth: f64) -> Result<Vec3, GeometryError> {
        if !(depth > MIN_DEPTH) {
            return Err(GeometryError::BehindCamera { depth });
        }
        let c = Vec3::new((u - self.cx) / self.fx * depth, (v - self.cy) / self.fy * depth, depth);
        Ok(self.to_base_frame(c))
    }
}

impl TryFrom<CameraFile> for CameraModel {
    type Error = GeometryError;

    fn try_from(f: CameraFile) -> Result<Self, Self::Error> {
        CameraModel::new(f.fx, f.fy, f.cx, f.cy, f.quaternion, f.translation.into(), f.width, f.height)
    }
}

impl From<CameraModel> for CameraFile {
    fn from(c: CameraModel) -> Self {
        CameraFile {
            fx: c.fx,
            fy: c.fy,
            cx: c.cx,
            cy: c.cy,
            quaternion: c.quaternion,
            translation: [c.translation.x, c.translation.y, c.translation.z],
            width: c.width,
            height: c.height,
        }
    }
}

/// Normalized time step `(t+1)/T`.
pub fn normalize_time(t: usize, len: usize) -> Result<f64, GeometryError> {
    if t >= len {
        return Err(GeometryError::InvalidIndex { index: t, len });
    }
    Ok((t + 1) as f64 / len as f64)
}

/// Dataset-wide workspace height bounds used to normalize base-frame z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeightRange {
    pub min: f64,
    pub max: f64,
}

impl Default for HeightRange {
    fn default() -> Self {
        Self { min: 0.0, max: 1.0 }
    }
}

impl HeightRange {
    pub fn new(min: f64, max: f64) -> Result<Self, GeometryError> {
        if !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(GeometryError::InvalidRange { min, max });
        }
        Ok(Self { min, max })
    }

    pub fn normalize(&self, h: f64) -> Result<f64, GeometryError> {
        normalize_height(h, self.min, self.max)
    }
}

/// `(h − h_min)/(h_max − h_min)` clamped to `[0, 1]`.
pub fn normalize_height(h: f64, h_min: f64, h_max: f64) -> Result<f64, GeometryError> {
    if !(h_max > h_min) {
        return Err(GeometryError::InvalidRange { min: h_min, max: h_max });
    }
    Ok(((h - h_min) / (h_max - h_min)).clamp(0.0, 1.0))
}

/// One proprioceptive sample of an episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EEState {
    pub step: u64,
    pub position: Vec3,
    /// Sensed gripper joint position, 0 = open, 1 = closed.
    pub gripper_sensed: f64,
    /// Commanded gripper joint position.
    pub gripper_target: f64,
}

impl EEState {
    /// Gripper values are clamped into `[0, 1]`.
    pub fn new(step: u64, position: Vec3, gripper_sensed: f64, gripper_target: f64) -> Self {
        Self {
            step,
            position,
            gripper_sensed: gripper_sensed.clamp(0.0, 1.0),
            gripper_target: gripper_target.clamp(0.0, 1.0),
        }
    }
}

/// A recorded (or simulated) episode: ordered EE states plus metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrajectory {
    pub episode_id: String,
    pub skill: String,
    pub instruction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub camera_ref: Option<String>,
    steps: Vec<EEState>,
}

impl EpisodeTrajectory {
    pub fn new(
        episode_id: impl Into<String>,
        skill: impl Into<String>,
        instruction: impl Into<String>,
        steps: Vec<EEState>,
    ) -> Result<Self, GeometryError> {
        if steps.is_empty() {
            return Err(GeometryError::InvalidEpisode("episode has no steps".into()));
        }
        if let Some(w) = steps.windows(2).find(|w| w[1].step <= w[0].step) {
            return Err(GeometryError::InvalidEpisode(format!(
                "step indices must be strictly increasing ({} then {})",
                w[0].step, w[1].step
            )));
        }
        if let Some(s) = steps.iter().find(|s| !s.position.is_finite()) {
            return Err(GeometryError::InvalidEpisode(format!("non-finite position at step {}", s.step)));
        }
        let steps = steps
            .into_iter()
            .map(|s| EEState::new(s.step, s.position, s.gripper_sensed, s.gripper_target))
            .collect();
        Ok(Self {
            episode_id: episode_id.into(),
            skill: skill.into(),
            instruction: instruction.into(),
            camera_ref: None,
            steps,
        })
    }

    pub fn with_camera_ref(mut self, camera_ref: impl Into<String>) -> Self {
        self.camera_ref = Some(camera_ref.into());
        self
    }

    pub fn steps(&self) -> &[EEState] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.steps.iter().map(|s| s.position).collect()
    }

    /// Index of the state whose `step` field equals `step`.
    pub fn index_of_step(&self, step: u64) -> Option<usize> {
        self.steps.binary_search_by_key(&step, |s| s.step).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelVertex {
    pub u: f64,
    pub v: f64,
    pub time_norm: f64,
    pub height_norm: f64,
    pub step: u64,
}

/// Projected trajectory: subpixel vertices with their time and height channels.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PixelPath {
    pub vertices: Vec<PixelVertex>,
}

impl PixelPath {
    pub fn new(vertices: Vec<PixelVertex>) -> Result<Self, GeometryError> {
        let path = Self { vertices };
        path.validate()?;
        Ok(path)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |msg: &str| Err(GeometryError::InvalidEpisode(msg.to_string()));
        for v in &self.vertices {
            if !(v.u.is_finite() && v.v.is_finite()) {
                return bad("pixel path has non-finite coordinates");
            }
            if !(0.0..=1.0).contains(&v.time_norm) || !(0.0..=1.0).contains(&v.height_norm) {
                return bad("pixel path normalized channels must lie in [0, 1]");
            }
        }
        if self.vertices.windows(2).any(|w| w[1].time_norm <= w[0].time_norm) {
            return bad("pixel path time must be strictly increasing");
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex_for_step(&self, step: u64) -> Option<&PixelVertex> {
        self.vertices.iter().find(|v| v.step == step)
    }

    /// Rescale pixel coordinates, e.g. from camera resolution to render resolution.
    pub fn scaled(&self, sx: f64, sy: f64) -> PixelPath {
        PixelPath {
            vertices: self
                .vertices
                .iter()
                .map(|v| PixelVertex { u: v.u * sx, v: v.v * sy, ..*v })
                .collect(),
        }
    }

    /// Total polyline length in pixels.
    pub fn pixel_length(&self) -> f64 {
        self.vertices
            .windows(2)
            .map(|w| (w[1].u - w[0].u).hypot(w[1].v - w[0].v))
            .sum()
    }
}

/// Result of projecting an episode: the path plus how many steps were dropped
/// because they fell behind the camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedPath {
    pub path: PixelPath,
    pub dropped_count: usize,
}

/// Project every step of an episode into pixel space, attaching normalized
/// time `(t+1)/T` and normalized height of the same step.
pub fn project_trajectory(
    camera: &CameraModel,
    episode: &EpisodeTrajectory,
    heights: HeightRange,
) -> Result<ProjectedPath, GeometryError> {
    let len = episode.len();
    let mut vertices = Vec::with_capacity(len);
    let mut dropped = 0;
    for (t, state) in episode.steps().iter().enumerate() {
        match camera.project_point(state.position) {
            Ok((u, v)) => vertices.push(PixelVertex {
                u,
                v,
                time_norm: normalize_time(t, len)?,
                height_norm: heights.normalize(state.position.z)?,
                step: state.step,
            }),
            Err(GeometryError::BehindCamera { .. }) => dropped += 1,
            Err(e) => return Err(e),
        }
    }
    if vertices.is_empty() {
        return Err(GeometryError::EmptyResult);
    }
    if dropped > 0 {
        log::warn!("episode {}: {dropped} of {len} steps behind the camera", episode.episode_id);
    }
    Ok(ProjectedPath { path: PixelPath { vertices }, dropped_count: dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn camera() -> CameraModel {
        CameraModel::from_intrinsics(100.0, 100.0, 64.0, 64.0, 128, 128).unwrap()
    }

    fn episode(points: &[Vec3]) -> EpisodeTrajectory {
        let steps = points
            .iter()
            .enumerate()
            .map(|(i, p)| EEState::new(i as u64, *p, 0.0, 0.0))
            .collect();
        EpisodeTrajectory::new("ep", "skill", "do it", steps).unwrap()
    }

    #[test]
    fn principal_point_and_offset() {
        let cam = camera();
        assert_eq!(cam.project_point(Vec3::new(0.0, 0.0, 1.0)).unwrap(), (64.0, 64.0));
        let (u, v) = cam.project_point(Vec3::new(0.1, 0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(u, 74.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 64.0, epsilon = 1e-12);
    }

    #[test]
    fn behind_camera_rejected() {
        let cam = camera();
        assert!(matches!(
            cam.project_point(Vec3::new(0.0, 0.0, -1.0)),
            Err(GeometryError::BehindCamera { .. })
        ));
        assert!(matches!(cam.project_point(Vec3::ZERO), Err(GeometryError::BehindCamera { .. })));
    }

    #[test]
    fn camera_validation() {
        assert!(CameraModel::from_intrinsics(0.0, 1.0, 0.0, 0.0, 10, 10).is_err());
        assert!(CameraModel::from_intrinsics(1.0, 1.0, 0.0, 0.0, 0, 10).is_err());
        assert!(CameraModel::new(1.0, 1.0, 0.0, 0.0, [1.0, 0.1, 0.0, 0.0], Vec3::ZERO, 4, 4).is_err());
    }

    #[test]
    fn camera_file_round_trip() {
        let s = r#"{"fx":500,"fy":510,"cx":160,"cy":128,"quaternion":[0.7071067811865476,0.7071067811865476,0,0],
                    "translation":[0,0.1,1.2],"width":320,"height":256}"#;
        let cam: CameraModel = serde_json::from_str(s).unwrap();
        assert_eq!(cam.width(), 320);
        let back: CameraModel = serde_json::from_str(&serde_json::to_string(&cam).unwrap()).unwrap();
        assert_eq!(back, cam);
        let bad = s.replace("0.7071067811865476,0.7071067811865476", "1,1");
        assert!(serde_json::from_str::<CameraModel>(&bad).is_err());
    }

    #[test]
    fn time_normalization() {
        assert_eq!(normalize_time(3, 4).unwrap(), 1.0);
        assert_eq!(normalize_time(0, 4).unwrap(), 0.25);
        assert_eq!(normalize_time(1, 2).unwrap(), 1.0);
        assert!(matches!(normalize_time(4, 4), Err(GeometryError::InvalidIndex { .. })));
    }

    #[test]
    fn height_normalization() {
        assert_eq!(normalize_height(0.2, 0.2, 0.9).unwrap(), 0.0);
        assert_eq!(normalize_height(0.9, 0.2, 0.9).unwrap(), 1.0);
        assert_eq!(normalize_height(0.5, 0.0, 1.0).unwrap(), 0.5);
        assert_eq!(normalize_height(7.0, 0.0, 1.0).unwrap(), 1.0);
        assert_eq!(normalize_height(-7.0, 0.0, 1.0).unwrap(), 0.0);
        assert!(matches!(normalize_height(0.5, 1.0, 1.0), Err(GeometryError::InvalidRange { .. })));
    }

    #[test]
    fn project_single_step() {
        let p = project_trajectory(&camera(), &episode(&[Vec3::new(0.0, 0.0, 1.0)]), HeightRange::default()).unwrap();
        assert_eq!(p.dropped_count, 0);
        let v = p.path.vertices[0];
        assert_eq!((v.u, v.v, v.time_norm), (64.0, 64.0, 1.0));
        assert_eq!(v.height_norm, 1.0);
    }

    #[test]
    fn project_four_steps_time_channel() {
        let pts: Vec<_> = (0..4).map(|i| Vec3::new(0.01 * i as f64, 0.0, 1.0)).collect();
        let p = project_trajectory(&camera(), &episode(&pts), HeightRange::default()).unwrap();
        let times: Vec<f64> = p.path.vertices.iter().map(|v| v.time_norm).collect();
        assert_eq!(times, vec![0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn project_drops_behind_camera_steps() {
        let mut pts: Vec<_> = (0..5).map(|i| Vec3::new(0.01 * i as f64, 0.0, 1.0)).collect();
        pts[2].z = -0.5;
        let p = project_trajectory(&camera(), &episode(&pts), HeightRange::default()).unwrap();
        assert_eq!(p.path.len(), 4);
        assert_eq!(p.dropped_count, 1);
        assert!(p.path.vertex_for_step(2).is_none());
        p.path.validate().unwrap();

        let all_behind = episode(&[Vec3::new(0.0, 0.0, -1.0), Vec3::new(0.0, 0.0, -2.0)]);
        assert_eq!(
            project_trajectory(&camera(), &all_behind, HeightRange::default()),
            Err(GeometryError::EmptyResult)
        );
    }

    #[test]
    fn episode_rejects_non_increasing_steps() {
        let s = |i| EEState::new(i, Vec3::ZERO, 0.0, 0.0);
        assert!(EpisodeTrajectory::new("e", "s", "i", vec![s(0), s(0)]).is_err());
        assert!(EpisodeTrajectory::new("e", "s", "i", vec![]).is_err());
        let ep = EpisodeTrajectory::new("e", "s", "i", vec![EEState::new(0, Vec3::ZERO, 1.5, -0.2)]).unwrap();
        assert_eq!(ep.steps()[0].gripper_sensed, 1.0);
        assert_eq!(ep.steps()[0].gripper_target, 0.0);
    }

    #[test]
    fn unproject_inverts_projection() {
        let cam = CameraModel::new(
            420.0, 410.0, 160.0, 120.0,
            [0.9238795325112867, 0.3826834323650898, 0.0, 0.0],
            Vec3::new(0.05, -0.1, 0.8), 320, 240,
        )
        .unwrap();
        let p = Vec3::new(0.3, 0.2, 0.4);
        let (u, v) = cam.project_point(p).unwrap();
        let depth = cam.to_camera_frame(p).z;
        let back = cam.unproject(u, v, depth).unwrap();
        assert_abs_diff_eq!(back.distance(p), 0.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn time_strictly_increasing(len in 1usize..500) {
            let ts: Vec<f64> = (0..len).map(|t| normalize_time(t, len).unwrap()).collect();
            prop_assert!(ts.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(*ts.last().unwrap(), 1.0);
        }

        #[test]
        fn height_monotone_and_idempotent(a in -2.0f64..3.0, b in -2.0f64..3.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let n_lo = normalize_height(lo, 0.0, 1.0).unwrap();
            let n_hi = normalize_height(hi, 0.0, 1.0).unwrap();
            prop_assert!(n_lo <= n_hi);
            prop_assert_eq!(normalize_height(n_lo, 0.0, 1.0).unwrap(), n_lo);
        }

        #[test]
        fn vertex_count_plus_dropped_is_length(zs in proptest::collection::vec(-1.0f64..2.0, 1..40)) {
            let pts: Vec<_> = zs.iter().map(|z| Vec3::new(0.1, -0.1, *z)).collect();
            match project_trajectory(&camera(), &episode(&pts), HeightRange::default()) {
                Ok(p) => prop_assert_eq!(p.path.len() + p.dropped_count, pts.len()),
                Err(e) => {
                    prop_assert_eq!(e, GeometryError::EmptyResult);
                    prop_assert!(zs.iter().all(|z| *z <= MIN_DEPTH));
                }
            }
        }
    }
}
