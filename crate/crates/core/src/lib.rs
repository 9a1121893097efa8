//! Hindsight trajectory sketches for robot manipulation episodes.
//!
//! * [`geometry`]: episode and camera types, pinhole projection, time/height normalization
//! * [`interaction`]: gripper grasp/release key-step detection
//! * [`sketch`]: deterministic RGB rasterization of sketches and marker decoding
//! * [`similarity`]: discrete Fréchet distance, nearest-trajectory retrieval, analytics
//! * [`ingest`]: episode logs, drawn strokes, hand demos and waypoint plans
//! * [`simulator`]: speed-limited kinematic execution with damped least-squares IK

pub mod geometry;
pub mod ingest;
pub mod interaction;
pub mod similarity;
pub mod simulator;
pub mod sketch;

pub use geometry::{CameraModel, EEState, EpisodeTrajectory, HeightRange, PixelPath, PixelVertex, Vec3};
pub use interaction::{EventKind, InteractionConfig, InteractionEvent};
pub use sketch::{RenderConfig, SketchImage, SketchMode, SketchSpec};
