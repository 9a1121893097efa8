//! Line-delimited episode logs.
//!
//! The first non-blank line is a JSON header
//! `{"episode_id", "skill", "instruction", "camera_ref"}`; every following
//! line is one step `{"step", "px", "py", "pz", "gripper_sensed", "gripper_target"}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::geometry::{EEState, EpisodeTrajectory, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeHeader {
    pub episode_id: String,
    pub skill: String,
    pub instruction: String,
    #[serde(default)]
    pub camera_ref: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
    pub gripper_sensed: f64,
    pub gripper_target: f64,
}

pub fn parse_episode_log(text: &str) -> Result<EpisodeTrajectory, IngestError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_line, header) = lines.next().ok_or(IngestError::Schema { line: 1, message: "missing header".into() })?;
    let header: EpisodeHeader = serde_json::from_str(header)
        .map_err(|e| IngestError::Schema { line: header_line, message: format!("bad header: {e}") })?;

    let mut steps: Vec<EEState> = Vec::new();
    for (line, text) in lines {
        let r: StepRecord =
            serde_json::from_str(text).map_err(|e| IngestError::Schema { line, message: e.to_string() })?;
        if let Some(prev) = steps.last() {
            if r.step <= prev.step {
                return Err(IngestError::NonMonotonicSteps { line, previous: prev.step, found: r.step });
            }
        }
        let position = Vec3::new(r.px, r.py, r.pz);
        if !position.is_finite() || !r.gripper_sensed.is_finite() || !r.gripper_target.is_finite() {
            return Err(IngestError::Schema { line, message: "non-finite value".into() });
        }
        steps.push(EEState::new(r.step, position, r.gripper_sensed, r.gripper_target));
    }
    if steps.is_empty() {
        return Err(IngestError::EmptyEpisode);
    }
    let mut ep = EpisodeTrajectory::new(header.episode_id, header.skill, header.instruction, steps)?;
    ep.camera_ref = header.camera_ref;
    Ok(ep)
}

pub fn read_episode_log(path: &Path) -> Result<EpisodeTrajectory, IngestError> {
    parse_episode_log(&std::fs::read_to_string(path)?)
}

pub fn write_episode_log(ep: &EpisodeTrajectory) -> String {
    let header = EpisodeHeader {
        episode_id: ep.episode_id.clone(),
        skill: ep.skill.clone(),
        instruction: ep.instruction.clone(),
        camera_ref: ep.camera_ref.clone(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for s in ep.steps() {
        let r = StepRecord {
            step: s.step,
            px: s.position.x,
            py: s.position.y,
            pz: s.position.z,
            gripper_sensed: s.gripper_sensed,
            gripper_target: s.gripper_target,
        };
        out.push_str(&serde_json::to_string(&r).expect("step serializes"));
        out.push('\n');
    }
    out
}
