use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::geometry::{CameraModel, GeometryError, HeightRange, PixelPath, PixelVertex, Vec3};
use crate::interaction::{EventKind, InteractionEvent};
use crate::sketch::{SketchMode, SketchSpec};

pub const DEFAULT_SAMPLES_PER_SEGMENT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanWaypoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gripper: Option<EventKind>,
}

impl PlanWaypoint {
    pub fn position(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }
}

/// Ordered 3D waypoints with optional gripper commands, as produced by a
/// planner or a code-writing language model. Serialized as a bare list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PlanWaypoint>", into = "Vec<PlanWaypoint>")]
pub struct WaypointPlan {
    waypoints: Vec<PlanWaypoint>,
}

impl WaypointPlan {
    pub fn new(waypoints: Vec<PlanWaypoint>) -> Result<Self, IngestError> {
        if waypoints.is_empty() {
            return Err(IngestError::Invalid("plan needs at least one waypoint".into()));
        }
        if let Some(i) = waypoints.iter().position(|w| !w.position().is_finite()) {
            return Err(IngestError::Invalid(format!("waypoint {i} is not finite")));
        }
        Ok(Self { waypoints })
    }

    /// Plan through `points` with no gripper commands.
    pub fn from_points(points: &[Vec3]) -> Result<Self, IngestError> {
        Self::new(points.iter().map(|p| PlanWaypoint { x: p.x, y: p.y, z: p.z, gripper: None }).collect())
    }

    pub fn waypoints(&self) -> &[PlanWaypoint] {
        &self.waypoints
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.waypoints.iter().map(PlanWaypoint::position).collect()
    }
}

impl TryFrom<Vec<PlanWaypoint>> for WaypointPlan {
    type Error = IngestError;
    fn try_from(v: Vec<PlanWaypoint>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<WaypointPlan> for Vec<PlanWaypoint> {
    fn from(p: WaypointPlan) -> Self {
        p.waypoints
    }
}

/// Draw a waypoint plan as a 2.5D sketch: straight-line interpolation with
/// `samples_per_segment` steps per segment, time `(i+1)/M` over the global
/// sample index, and a marker at every waypoint carrying a gripper command.
pub fn plan_to_spec(
    plan: &WaypointPlan,
    camera: &CameraModel,
    samples_per_segment: usize,
    heights: HeightRange,
) -> Result<SketchSpec, IngestError> {
    if samples_per_segment == 0 {
        return Err(IngestError::Invalid("samples_per_segment must be at least 1".into()));
    }
    let wps = plan.waypoints();
    for (i, w) in wps.iter().enumerate() {
        match camera.project_point(w.position()) {
            Ok(_) => {}
            Err(GeometryError::BehindCamera { .. }) => return Err(IngestError::BehindCamera(i)),
            Err(e) => return Err(e.into()),
        }
    }

    let mut points = vec![wps[0].position()];
    for w in wps.windows(2) {
        let (a, b) = (w[0].position(), w[1].position());
        points.extend((1..=samples_per_segment).map(|k| a.lerp(b, k as f64 / samples_per_segment as f64)));
    }
    let total = points.len();
    let vertices = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            // samples between two in-front waypoints are in front as well
            let (u, v) = camera.project_point(*p)?;
            Ok(PixelVertex {
                u,
                v,
                time_norm: (i + 1) as f64 / total as f64,
                height_norm: heights.normalize(p.z)?,
                step: i as u64,
            })
        })
        .collect::<Result<Vec<_>, GeometryError>>()?;
    let events = wps
        .iter()
        .enumerate()
        .filter_map(|(i, w)| w.gripper.map(|kind| InteractionEvent { step: (i * samples_per_segment) as u64, kind }))
        .collect();
    Ok(SketchSpec::new(PixelPath::new(vertices)?, events, SketchMode::TwoPointFiveD)?)
}
