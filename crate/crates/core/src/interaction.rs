//! Gripper interaction detection.
//!
//! A step is "grasping" when the commanded gripper position leads the sensed
//! one (`target − sensed > 0`, the fingers are blocked by an object) and the
//! command itself exceeds the closing threshold ε. Key steps are the steps
//! `t` just before the grasping state flips.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::EpisodeTrajectory;

pub const DEFAULT_EPSILON: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InteractionError {
    #[error("episode needs at least 2 steps for key-step detection, got {0}")]
    EpisodeTooShort(usize),
    #[error("closing threshold must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("invalid keyframes: {0}")]
    InvalidKeyframes(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Close,
    Open,
}

impl EventKind {
    /// Grasping state after the transition.
    pub fn grasping_after(self) -> bool {
        matches!(self, EventKind::Close)
    }
}

/// A detected key step. `step` is the episode's own step index of the state
/// just before the transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionEvent {
    pub step: u64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct InteractionConfig {
    epsilon: f64,
}

impl InteractionConfig {
    pub fn new(epsilon: f64) -> Result<Self, InteractionError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(InteractionError::InvalidEpsilon(epsilon));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl Default for InteractionConfig {
    fn default() -> Self {
        Self { epsilon: DEFAULT_EPSILON }
    }
}

impl TryFrom<f64> for InteractionConfig {
    type Error = InteractionError;
    fn try_from(eps: f64) -> Result<Self, Self::Error> {
        Self::new(eps)
    }
}

impl From<InteractionConfig> for f64 {
    fn from(c: InteractionConfig) -> f64 {
        c.epsilon
    }
}

/// True when the gripper is closing and holding something.
pub fn grasp_state(sensed: f64, target: f64, epsilon: f64) -> bool {
    target - sensed > 0.0 && target > epsilon
}

/// Transitions of a boolean grasp sequence, reported at the index before the flip.
pub fn transitions(states: &[bool]) -> Vec<(usize, EventKind)> {
    states
        .windows(2)
        .enumerate()
        .filter_map(|(t, w)| match (w[0], w[1]) {
            (false, true) => Some((t, EventKind::Close)),
            (true, false) => Some((t, EventKind::Open)),
            _ => None,
        })
        .collect()
}

pub fn grasp_states(episode: &EpisodeTrajectory, cfg: InteractionConfig) -> Vec<bool> {
    episode
        .steps()
        .iter()
        .map(|s| grasp_state(s.gripper_sensed, s.gripper_target, cfg.epsilon))
        .collect()
}

pub fn detect_key_steps(
    episode: &EpisodeTrajectory,
    cfg: InteractionConfig,
) -> Result<Vec<InteractionEvent>, InteractionError> {
    if episode.len() < 2 {
        return Err(InteractionError::EpisodeTooShort(episode.len()));
    }
    let steps = episode.steps();
    Ok(transitions(&grasp_states(episode, cfg))
        .into_iter()
        .map(|(t, kind)| InteractionEvent { step: steps[t].step, kind })
        .collect())
}

/// Sensed/target values that read as grasping for any ε < 1.
pub const GRASPING_SIGNAL: (f64, f64) = (0.5, 1.0);
/// Sensed/target values that read as not grasping for any ε.
pub const RELEASED_SIGNAL: (f64, f64) = (0.0, 0.0);

/// Build a per-step grasp sequence of length `len` from key steps given as
/// positional indices. Each event at index `t` sets the state from `t+1` on.
/// The sequence starts grasped iff the first event is an `Open`.
pub fn grasp_sequence_from_events(len: usize, events: &[(usize, EventKind)]) -> Result<Vec<bool>, InteractionError> {
    let mut sorted = events.to_vec();
    sorted.sort_by_key(|(t, _)| *t);
    if let Some(w) = sorted.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(InteractionError::InvalidKeyframes(format!("two events at index {}", w[0].0)));
    }
    let initial = matches!(sorted.first(), Some((_, EventKind::Open)));
    let mut states = vec![initial; len];
    let mut current = initial;
    for &(t, kind) in &sorted {
        if t + 1 >= len {
            return Err(InteractionError::InvalidKeyframes(format!(
                "event at index {t} needs a following step (length {len})"
            )));
        }
        if current == kind.grasping_after() {
            return Err(InteractionError::InvalidKeyframes(format!(
                "{kind:?} at index {t} does not change the grasp state"
            )));
        }
        current = kind.grasping_after();
        states[t + 1..].iter_mut().for_each(|s| *s = current);
    }
    Ok(states)
}

/// Synthesize (sensed, target) gripper channels that reproduce `states`.
pub fn synthesize_gripper_signals(states: &[bool]) -> Vec<(f64, f64)> {
    states
        .iter()
        .map(|&g| if g { GRASPING_SIGNAL } else { RELEASED_SIGNAL })
        .collect()
}
