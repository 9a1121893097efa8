//! Kinematic execution of waypoint plans.
//!
//! The end effector follows straight segments between waypoints at bounded
//! speed, sampled every `dt`. In joint-space mode every sample is routed
//! through damped least-squares IK on a serial chain and the executed
//! position is the chain's forward kinematics. There is no dynamics and no
//! collision checking.

mod chain;

pub use chain::{solve_ik_dls, IkParams, KinematicChain};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{EEState, EpisodeTrajectory, GeometryError, Vec3};
use crate::ingest::WaypointPlan;
use crate::interaction::synthesize_gripper_signals;
use crate::similarity::frechet_bounded;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("target unreachable (residual {residual} m)")]
    Unreachable { residual: f64 },
    #[error("joint {joint} is outside or pinned at its limit")]
    LimitViolation { joint: usize },
    #[error("commanded path is empty")]
    EmptyPath,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionMode {
    #[default]
    TaskSpace,
    JointSpace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// End-effector speed limit, m/s.
    pub max_speed: f64,
    /// Sample period, s.
    pub dt: f64,
    pub mode: ExecutionMode,
    pub chain: KinematicChain,
    pub ik: IkParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            max_speed: 0.5,
            dt: 0.05,
            mode: ExecutionMode::TaskSpace,
            chain: KinematicChain::default(),
            ik: IkParams::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.max_speed > 0.0 && self.max_speed.is_finite()) || !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::InvalidConfig(format!(
                "max_speed and dt must be positive, got {} and {}",
                self.max_speed, self.dt
            )));
        }
        if self.mode == ExecutionMode::JointSpace {
            self.chain.validate()?;
            self.ik.validate()?;
        }
        Ok(())
    }

    /// Largest distance covered in one sample period.
    pub fn step_length(&self) -> f64 {
        self.max_speed * self.dt
    }
}

/// Interior subdivisions needed so no piece of a `len`-long segment exceeds `step`.
fn subdivisions(len: f64, step: f64) -> usize {
    if len == 0.0 {
        0
    } else {
        // the small slack keeps exact multiples from gaining a sliver segment
        ((len / step) - 1e-9).ceil().max(1.0) as usize
    }
}

/// Positions along `points` with consecutive spacing at most `spacing`.
/// Every input point appears exactly in the output.
pub fn densify(points: &[Vec3], spacing: f64) -> Vec<Vec3> {
    let Some(&first) = points.first() else { return Vec::new() };
    let mut out = vec![first];
    for w in points.windows(2) {
        let n = subdivisions(w[0].distance(w[1]), spacing);
        out.extend((1..n).map(|k| w[0].lerp(w[1], k as f64 / n as f64)));
        if n > 0 {
            out.push(w[1]);
        }
    }
    out
}

/// Task-space samples of a plan with the grasp state of each sample.
///
/// A waypoint carrying a gripper command adds one hold sample at the same
/// position during which the gripper actuates, so the state changes between
/// the arrival sample and the hold sample.
pub fn sample_plan(plan: &WaypointPlan, cfg: &SimConfig) -> Result<Vec<(Vec3, bool)>, SimError> {
    cfg.validate()?;
    let step = cfg.step_length();
    let wps = plan.waypoints();
    let mut grasping = false;
    let mut out: Vec<(Vec3, bool)> = Vec::new();
    for (i, wp) in wps.iter().enumerate() {
        let target = wp.position();
        if i == 0 {
            out.push((target, grasping));
        } else {
            let from = wps[i - 1].position();
            let n = subdivisions(from.distance(target), step);
            for k in 1..=n {
                let p = if k == n { target } else { from.lerp(target, k as f64 / n as f64) };
                out.push((p, grasping));
            }
        }
        if let Some(kind) = wp.gripper {
            grasping = kind.grasping_after();
            out.push((target, grasping));
        }
    }
    Ok(out)
}

/// Execute a plan and record the result as an episode with steps `0..N`.
pub fn execute(plan: &WaypointPlan, cfg: &SimConfig) -> Result<EpisodeTrajectory, SimError> {
    let samples = sample_plan(plan, cfg)?;
    let positions: Vec<Vec3> = match cfg.mode {
        ExecutionMode::TaskSpace => samples.iter().map(|(p, _)| *p).collect(),
        ExecutionMode::JointSpace => {
            let mut q = cfg.chain.rest_pose();
            let mut out = Vec::with_capacity(samples.len());
            for (p, _) in &samples {
                q = solve_ik_dls(&cfg.chain, *p, &q, &cfg.ik)?;
                out.push(cfg.chain.forward_kinematics(&q));
            }
            out
        }
    };
    let states: Vec<bool> = samples.iter().map(|(_, g)| *g).collect();
    let steps = positions
        .into_iter()
        .zip(synthesize_gripper_signals(&states))
        .enumerate()
        .map(|(i, (p, (sensed, target)))| EEState::new(i as u64, p, sensed, target))
        .collect();
    Ok(EpisodeTrajectory::new("rollout", "", "", steps)?)
}

/// Fréchet distance between a commanded path and the executed positions.
pub fn roundtrip_error(commanded: &[Vec3], executed: &EpisodeTrajectory) -> Result<f64, SimError> {
    if commanded.is_empty() {
        return Err(SimError::EmptyPath);
    }
    Ok(frechet_bounded(commanded, &executed.positions(), f64::INFINITY).expect("unbounded"))
}
