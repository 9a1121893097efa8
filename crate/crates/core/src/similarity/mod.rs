//! Motion similarity between end-effector waypoint sequences.
//!
//! Distances are discrete Fréchet distances under the Euclidean ground
//! metric on positions only; orientation and gripper state never enter.

mod analytics;
pub mod oracle;

pub use analytics::{
    analyze, distance_distribution, first_interaction_height_alignment, median, semantic_relevance,
    AnalyticsReport, DistanceDistribution, HeightAlignment, HeightDelta, QueryDistance, SkillHistogram,
};

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{EpisodeTrajectory, Vec3};
use crate::interaction::{detect_key_steps, InteractionConfig};

/// Candidates per worker partition during a dataset scan.
const SCAN_CHUNK: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimilarityError {
    #[error("waypoint sequence is empty")]
    EmptySequence,
    #[error("waypoint sequence has a non-finite coordinate at index {0}")]
    NonFinite(usize),
    #[error("oracle input too large: {m}x{n} exceeds the {limit} cell guard")]
    TooLarge { m: usize, n: usize, limit: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("resample count must be at least 1")]
    ZeroResample,
}

/// Non-empty ordered sequence of finite waypoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec3>", into = "Vec<Vec3>")]
pub struct WaypointSeq(Vec<Vec3>);

impl WaypointSeq {
    pub fn new(points: Vec<Vec3>) -> Result<Self, SimilarityError> {
        if points.is_empty() {
            return Err(SimilarityError::EmptySequence);
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(SimilarityError::NonFinite(i));
        }
        Ok(Self(points))
    }

    pub fn from_episode(ep: &EpisodeTrajectory) -> Self {
        // episodes are non-empty with finite positions by construction
        Self(ep.positions())
    }

    pub fn points(&self) -> &[Vec3] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn arc_length(&self) -> f64 {
        self.0.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    /// `n` points spaced uniformly in arc length along the polyline, keeping
    /// both endpoints.
    pub fn resample(&self, n: usize) -> Result<WaypointSeq, SimilarityError> {
        if n == 0 {
            return Err(SimilarityError::ZeroResample);
        }
        let pts = &self.0;
        if n == 1 {
            return Ok(Self(vec![pts[0]]));
        }
        let total = self.arc_length();
        if pts.len() == 1 || total == 0.0 {
            return Ok(Self(vec![pts[0]; n]));
        }
        let mut out = Vec::with_capacity(n);
        let mut seg = 0;
        let mut seg_start = 0.0;
        for i in 0..n {
            if i == n - 1 {
                out.push(*pts.last().unwrap());
                break;
            }
            let s = total * i as f64 / (n - 1) as f64;
            loop {
                let len = pts[seg].distance(pts[seg + 1]);
                if s <= seg_start + len || seg + 2 == pts.len() {
                    let t = if len > 0.0 { ((s - seg_start) / len).clamp(0.0, 1.0) } else { 0.0 };
                    out.push(pts[seg].lerp(pts[seg + 1], t));
                    break;
                }
                seg_start += len;
                seg += 1;
            }
        }
        Ok(Self(out))
    }
}

impl TryFrom<Vec<Vec3>> for WaypointSeq {
    type Error = SimilarityError;
    fn try_from(v: Vec<Vec3>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<WaypointSeq> for Vec<Vec3> {
    fn from(s: WaypointSeq) -> Self {
        s.0
    }
}

/// Exact discrete Fréchet distance in O(m·n) time and O(n) memory.
pub fn frechet_dp(a: &WaypointSeq, b: &WaypointSeq) -> f64 {
    frechet_bounded(a.points(), b.points(), f64::INFINITY).expect("unbounded search always completes")
}

/// Discrete Fréchet distance, abandoned early once it is certain to exceed
/// `bound`. Returns `None` exactly when the distance is greater than `bound`.
///
/// Every coupling visits every row of the DP table, so a row whose minimum
/// already exceeds the bound proves the final value does too.
pub fn frechet_bounded(a: &[Vec3], b: &[Vec3], bound: f64) -> Option<f64> {
    assert!(!a.is_empty() && !b.is_empty(), "Fréchet distance of an empty sequence");
    let n = b.len();
    let mut prev = vec![0.0f64; n];
    let mut cur = vec![0.0f64; n];

    let mut row_min = f64::INFINITY;
    for j in 0..n {
        let d = a[0].distance(b[j]);
        prev[j] = if j == 0 { d } else { d.max(prev[j - 1]) };
        row_min = row_min.min(prev[j]);
    }
    if row_min > bound {
        return None;
    }
    for ai in &a[1..] {
        let mut row_min = f64::INFINITY;
        cur[0] = ai.distance(b[0]).max(prev[0]);
        row_min = row_min.min(cur[0]);
        for j in 1..n {
            let best = prev[j - 1].min(prev[j]).min(cur[j - 1]);
            cur[j] = ai.distance(b[j]).max(best);
            row_min = row_min.min(cur[j]);
        }
        if row_min > bound {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = prev[n - 1];
    (d <= bound).then_some(d)
}

/// A dataset trajectory prepared for retrieval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub episode_id: String,
    pub skill: String,
    pub waypoints: WaypointSeq,
    /// Base-frame height of the first gripper interaction, if any.
    pub first_interaction_z: Option<f64>,
}

impl TrajectoryRecord {
    pub fn new(episode_id: impl Into<String>, skill: impl Into<String>, waypoints: WaypointSeq) -> Self {
        Self { episode_id: episode_id.into(), skill: skill.into(), waypoints, first_interaction_z: None }
    }

    pub fn with_first_interaction_z(mut self, z: Option<f64>) -> Self {
        self.first_interaction_z = z;
        self
    }

    /// Positions of the episode plus the z of its first detected key step.
    pub fn from_episode(ep: &EpisodeTrajectory, cfg: InteractionConfig) -> Self {
        let first_z = detect_key_steps(ep, cfg)
            .ok()
            .and_then(|events| events.first().copied())
            .and_then(|e| ep.index_of_step(e.step))
            .map(|i| ep.steps()[i].position.z);
        Self {
            episode_id: ep.episode_id.clone(),
            skill: ep.skill.clone(),
            waypoints: WaypointSeq::from_episode(ep),
            first_interaction_z: first_z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityResult {
    pub episode_id: String,
    pub skill: String,
    pub distance: f64,
}

/// Ascending distance, ties by episode id.
pub fn rank_order(a: &SimilarityResult, b: &SimilarityResult) -> Ordering {
    a.distance.total_cmp(&b.distance).then_with(|| a.episode_id.cmp(&b.episode_id))
}

/// Sort, then keep the best `k`.
pub fn merge_ranked(mut parts: Vec<SimilarityResult>, k: usize) -> Vec<SimilarityResult> {
    parts.sort_by(rank_order);
    parts.truncate(k);
    parts
}

/// Sequential top-k over one partition of the dataset. The query must
/// already be resampled if resampling is in effect.
pub fn top_k_in(
    query: &WaypointSeq,
    candidates: &[TrajectoryRecord],
    k: usize,
    resample_n: Option<usize>,
) -> Result<Vec<SimilarityResult>, SimilarityError> {
    if k == 0 {
        return Err(SimilarityError::ZeroK);
    }
    let mut best: Vec<SimilarityResult> = Vec::with_capacity(k + 1);
    for c in candidates {
        let bound = if best.len() < k { f64::INFINITY } else { best[k - 1].distance };
        let resampled;
        let points = match resample_n {
            Some(n) => {
                resampled = c.waypoints.resample(n)?;
                resampled.points()
            }
            None => c.waypoints.points(),
        };
        // a candidate whose distance equals the bound may still win the id tie-break
        let Some(distance) = frechet_bounded(query.points(), points, bound) else { continue };
        let r = SimilarityResult { episode_id: c.episode_id.clone(), skill: c.skill.clone(), distance };
        let pos = best.partition_point(|x| rank_order(x, &r) == Ordering::Less);
        if pos < k {
            best.insert(pos, r);
            best.truncate(k);
        }
    }
    Ok(best)
}

/// The `k` dataset trajectories closest to `query`, ascending by distance
/// with ties broken by episode id. With `resample_n`, query and candidates
/// are both arc-length resampled to that many points first.
///
/// The scan is split across rayon workers; every partition keeps its own
/// exact top-k, so the merged ranking does not depend on the partitioning.
pub fn top_k_similar(
    query: &WaypointSeq,
    dataset: &[TrajectoryRecord],
    k: usize,
    resample_n: Option<usize>,
) -> Result<Vec<SimilarityResult>, SimilarityError> {
    if k == 0 {
        return Err(SimilarityError::ZeroK);
    }
    let query = match resample_n {
        Some(n) => query.resample(n)?,
        None => query.clone(),
    };
    let parts = dataset
        .par_chunks(SCAN_CHUNK)
        .map(|chunk| top_k_in(&query, chunk, k, resample_n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(merge_ranked(parts.into_iter().flatten().collect(), k))
}
