//! Parsers and converters for the trajectory sources: recorded episode logs,
//! human-drawn strokes, hand-landmark demonstrations and waypoint plans.

mod episode_log;
mod hand_demo;
mod plan;
mod stroke;

pub use episode_log::{parse_episode_log, read_episode_log, write_episode_log, EpisodeHeader, StepRecord};
pub use hand_demo::{hand_demo_to_episode, HandDemoInput, HandFrame, LandmarkSelection, LANDMARK_COUNT};
pub use plan::{plan_to_spec, PlanWaypoint, WaypointPlan, DEFAULT_SAMPLES_PER_SEGMENT};
pub use stroke::{
    stroke_to_spec, HeightAnnotation, MarkerClick, StrokeInput, StrokeParams, DEFAULT_RESAMPLE_M,
};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::interaction::InteractionError;
use crate::sketch::SketchError;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: step {found} does not follow step {previous}")]
    NonMonotonicSteps { line: usize, previous: u64, found: u64 },
    #[error("episode log has no steps")]
    EmptyEpisode,
    #[error("stroke needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("frame {frame}: no usable depth for landmark {landmark}")]
    MissingDepth { frame: usize, landmark: usize },
    #[error("landmark index {0} is out of range")]
    BadLandmarkIndex(usize),
    #[error("frame {frame}: expected {expected} landmarks, found {found}")]
    LandmarkCount { frame: usize, expected: usize, found: usize },
    #[error("waypoint {0} projects behind the camera")]
    BehindCamera(usize),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Interaction(#[from] InteractionError),
    #[error(transparent)]
    Sketch(#[from] SketchError),
}
