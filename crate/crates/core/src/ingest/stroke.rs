use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::geometry::{HeightRange, PixelPath, PixelVertex, Vec3};
use crate::interaction::{EventKind, InteractionEvent};
use crate::similarity::WaypointSeq;
use crate::sketch::{SketchMode, SketchSpec};

pub const DEFAULT_RESAMPLE_M: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkerClick {
    pub pixel: [f64; 2],
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeightAnnotation {
    pub pixel: [f64; 2],
    /// Meters in the robot base frame.
    pub height: f64,
}

/// A drawn stroke as sent by the drawing client: mouse-drag samples plus
/// marker clicks and sparse height annotations, all in pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeInput {
    pub samples: Vec<[f64; 2]>,
    #[serde(default)]
    pub marker_clicks: Vec<MarkerClick>,
    #[serde(default)]
    pub height_annotations: Vec<HeightAnnotation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrokeParams {
    pub resample_m: usize,
    pub heights: HeightRange,
}

impl Default for StrokeParams {
    fn default() -> Self {
        Self { resample_m: DEFAULT_RESAMPLE_M, heights: HeightRange::default() }
    }
}

fn nearest_vertex(points: &[Vec3], pixel: [f64; 2]) -> usize {
    let target = Vec3::new(pixel[0], pixel[1], 0.0);
    let mut best = (0, f64::INFINITY);
    for (i, p) in points.iter().enumerate() {
        let d = p.distance(target);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Heights at every vertex from sparse `(vertex, meters)` anchors: linear in
/// arc length between anchors, held constant outside them.
fn interpolate_heights(arc: &[f64], anchors: &[(usize, f64)]) -> Vec<f64> {
    arc.iter()
        .enumerate()
        .map(|(i, &s)| {
            let after = anchors.partition_point(|(a, _)| *a < i);
            match (after.checked_sub(1).map(|j| anchors[j]), anchors.get(after)) {
                (_, Some(&(a, h))) if a == i => h,
                (Some((a0, h0)), Some(&(a1, h1))) => {
                    let f = (s - arc[a0]) / (arc[a1] - arc[a0]);
                    h0 + (h1 - h0) * f
                }
                (Some((_, h0)), None) => h0,
                (None, Some(&(_, h1))) => h1,
                (None, None) => 0.0,
            }
        })
        .collect()
}

/// Turn a drawn stroke into a sketch.
///
/// The stroke is resampled to `resample_m` points uniform in arc length and
/// vertex `i` gets time `(i+1)/m`. Marker clicks and height annotations snap
/// to the nearest resampled vertex. A stroke without height annotations
/// produces a 2D sketch.
pub fn stroke_to_spec(stroke: &StrokeInput, params: &StrokeParams) -> Result<SketchSpec, IngestError> {
    if stroke.samples.len() < 2 {
        return Err(IngestError::TooFewSamples(stroke.samples.len()));
    }
    let m = params.resample_m;
    if m < 2 {
        return Err(IngestError::Invalid(format!("resample_m must be at least 2, got {m}")));
    }
    let raw = WaypointSeq::new(stroke.samples.iter().map(|s| Vec3::new(s[0], s[1], 0.0)).collect())
        .map_err(|e| IngestError::Invalid(format!("stroke samples: {e}")))?;
    let total = raw.arc_length();
    let resampled = raw.resample(m).expect("m >= 2");
    let pts = resampled.points();
    // arc-length parameter of each resampled vertex along the drawn stroke
    let arc: Vec<f64> = (0..m).map(|i| total * i as f64 / (m - 1) as f64).collect();

    let mut anchors: Vec<(usize, f64)> = Vec::new();
    for a in &stroke.height_annotations {
        if !a.height.is_finite() {
            return Err(IngestError::Invalid("non-finite height annotation".into()));
        }
        let i = nearest_vertex(pts, a.pixel);
        // a later annotation on the same vertex replaces the earlier one
        anchors.retain(|(j, _)| *j != i);
        anchors.push((i, a.height));
    }
    anchors.sort_by_key(|(i, _)| *i);
    let heights = interpolate_heights(&arc, &anchors);

    let mut vertices = Vec::with_capacity(m);
    for (i, p) in pts.iter().enumerate() {
        let height_norm = if anchors.is_empty() { 0.0 } else { params.heights.normalize(heights[i])? };
        vertices.push(PixelVertex {
            u: p.x,
            v: p.y,
            time_norm: (i + 1) as f64 / m as f64,
            height_norm,
            step: i as u64,
        });
    }
    let events = stroke
        .marker_clicks
        .iter()
        .map(|c| InteractionEvent { step: nearest_vertex(pts, c.pixel) as u64, kind: c.kind })
        .collect();
    let mode = if anchors.is_empty() { SketchMode::TwoD } else { SketchMode::TwoPointFiveD };
    Ok(SketchSpec::new(PixelPath::new(vertices)?, events, mode)?)
}
