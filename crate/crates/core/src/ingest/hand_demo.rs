use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::geometry::{CameraModel, EEState, EpisodeTrajectory, Vec3};
use crate::interaction::{
    grasp_sequence_from_events, synthesize_gripper_signals, EventKind, InteractionError, InteractionEvent,
};

/// Landmarks per detected hand.
pub const LANDMARK_COUNT: usize = 21;

/// Which hand landmarks stand in for the two gripper fingers.
///
/// Defaults are the fingertip and the joint below it on the thumb (4, 3) and
/// on the index finger (8, 7), in the usual 21-point hand topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LandmarkSelection {
    pub thumb: [usize; 2],
    pub index: [usize; 2],
}

impl Default for LandmarkSelection {
    fn default() -> Self {
        Self { thumb: [4, 3], index: [8, 7] }
    }
}

impl LandmarkSelection {
    fn indices(&self) -> [usize; 4] {
        [self.thumb[0], self.thumb[1], self.index[0], self.index[1]]
    }
}

/// One video frame of hand landmarks: either 2D pixels with per-landmark
/// depth (meters along the camera axis), or base-frame 3D points.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HandFrame {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landmarks: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<Vec<Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landmarks_3d: Option<Vec<[f64; 3]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandDemoInput {
    #[serde(default = "default_id")]
    pub episode_id: String,
    #[serde(default)]
    pub skill: String,
    #[serde(default)]
    pub instruction: String,
    pub frames: Vec<HandFrame>,
    /// Frames at which the hand starts grasping.
    #[serde(default)]
    pub grasp_keyframes: Vec<usize>,
    /// Frames at which the hand starts releasing.
    #[serde(default)]
    pub release_keyframes: Vec<usize>,
    #[serde(default)]
    pub selection: LandmarkSelection,
}

fn default_id() -> String {
    "hand_demo".to_string()
}

fn frame_center(frame: &HandFrame, index: usize, camera: &CameraModel, sel: &[usize; 4]) -> Result<Vec3, IngestError> {
    let count_err = |found| IngestError::LandmarkCount { frame: index, expected: LANDMARK_COUNT, found };
    let mut sum = Vec3::ZERO;
    if let Some(points) = &frame.landmarks_3d {
        if points.len() != LANDMARK_COUNT {
            return Err(count_err(points.len()));
        }
        for &l in sel {
            sum = sum + Vec3::from(points[l]);
        }
    } else {
        let points = frame.landmarks.as_ref().ok_or_else(|| count_err(0))?;
        if points.len() != LANDMARK_COUNT {
            return Err(count_err(points.len()));
        }
        let depth = frame.depth.as_deref().unwrap_or(&[]);
        for &l in sel {
            let d = depth
                .get(l)
                .copied()
                .flatten()
                .filter(|d| d.is_finite() && *d > 0.0)
                .ok_or(IngestError::MissingDepth { frame: index, landmark: l })?;
            let [u, v] = points[l];
            sum = sum + camera.unproject(u, v, d)?;
        }
    }
    if !sum.is_finite() {
        return Err(IngestError::Invalid(format!("frame {index}: non-finite landmark")));
    }
    Ok(sum * 0.25)
}

/// Convert a hand demonstration into an episode.
///
/// The end-effector position of each frame is the centroid of the four
/// selected landmarks lifted to the base frame. Keyframes become close/open
/// events and the gripper channels are synthesized so that key-step
/// detection on the episode reproduces exactly those events.
pub fn hand_demo_to_episode(
    demo: &HandDemoInput,
    camera: &CameraModel,
) -> Result<(EpisodeTrajectory, Vec<InteractionEvent>), IngestError> {
    let sel = demo.selection.indices();
    if let Some(&bad) = sel.iter().find(|&&l| l >= LANDMARK_COUNT) {
        return Err(IngestError::BadLandmarkIndex(bad));
    }
    if demo.frames.is_empty() {
        return Err(IngestError::Invalid("hand demo has no frames".into()));
    }
    let n = demo.frames.len();
    let mut keyframes: Vec<(usize, EventKind)> = demo
        .grasp_keyframes
        .iter()
        .map(|&f| (f, EventKind::Close))
        .chain(demo.release_keyframes.iter().map(|&f| (f, EventKind::Open)))
        .collect();
    if let Some((f, _)) = keyframes.iter().find(|(f, _)| *f >= n) {
        return Err(InteractionError::InvalidKeyframes(format!("keyframe {f} outside {n} frames")).into());
    }
    keyframes.sort_by_key(|(f, _)| *f);
    let states = grasp_sequence_from_events(n, &keyframes)?;
    let signals = synthesize_gripper_signals(&states);

    let steps = demo
        .frames
        .iter()
        .enumerate()
        .map(|(i, frame)| {
            let (sensed, target) = signals[i];
            Ok(EEState::new(i as u64, frame_center(frame, i, camera, &sel)?, sensed, target))
        })
        .collect::<Result<Vec<_>, IngestError>>()?;
    let episode = EpisodeTrajectory::new(demo.episode_id.clone(), demo.skill.clone(), demo.instruction.clone(), steps)?;
    let events = keyframes.into_iter().map(|(f, kind)| InteractionEvent { step: f as u64, kind }).collect();
    Ok((episode, events))
}
