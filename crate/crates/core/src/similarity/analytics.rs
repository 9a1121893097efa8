//! Motion-generalization statistics over query trajectories and their
//! nearest dataset neighbours: which skills the neighbours belong to, how
//! the height of the first gripper interaction compares, and how far away
//! the neighbours are.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{top_k_similar, SimilarityError, SimilarityResult, TrajectoryRecord};

/// Query skill → neighbour skill → count.
pub type SkillHistogram = BTreeMap<String, BTreeMap<String, usize>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightDelta {
    pub query_id: String,
    pub query_skill: String,
    pub match_id: String,
    /// `z(first interaction of match) − z(first interaction of query)`, meters.
    pub dz: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HeightAlignment {
    pub deltas: Vec<HeightDelta>,
    /// Queries without any interaction event.
    pub skipped_queries: usize,
    /// Neighbours without any interaction event (for queries that had one).
    pub skipped_matches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryDistance {
    pub query_id: String,
    pub query_skill: String,
    /// Mean distance over the query's top-k neighbours.
    pub mean_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DistanceDistribution {
    pub per_query: Vec<QueryDistance>,
    pub median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsReport {
    pub k: usize,
    pub query_count: usize,
    pub dataset_size: usize,
    pub skill_histogram: SkillHistogram,
    pub height_alignment: HeightAlignment,
    pub distances: DistanceDistribution,
}

/// Median; the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { (v[mid - 1] + v[mid]) / 2.0 })
}

fn retrieve_all(
    queries: &[TrajectoryRecord],
    dataset: &[TrajectoryRecord],
    k: usize,
    resample_n: Option<usize>,
) -> Result<Vec<Vec<SimilarityResult>>, SimilarityError> {
    queries.iter().map(|q| top_k_similar(&q.waypoints, dataset, k, resample_n)).collect()
}

fn histogram(queries: &[TrajectoryRecord], matches: &[Vec<SimilarityResult>]) -> SkillHistogram {
    let mut hist = SkillHistogram::new();
    for (q, found) in queries.iter().zip(matches) {
        let row = hist.entry(q.skill.clone()).or_default();
        for m in found {
            *row.entry(m.skill.clone()).or_default() += 1;
        }
    }
    hist
}

fn height_deltas(
    queries: &[TrajectoryRecord],
    dataset: &[TrajectoryRecord],
    matches: &[Vec<SimilarityResult>],
) -> HeightAlignment {
    let by_id: HashMap<&str, &TrajectoryRecord> = dataset.iter().map(|r| (r.episode_id.as_str(), r)).collect();
    let mut out = HeightAlignment::default();
    for (q, found) in queries.iter().zip(matches) {
        let Some(qz) = q.first_interaction_z else {
            out.skipped_queries += 1;
            continue;
        };
        for m in found {
            match by_id.get(m.episode_id.as_str()).and_then(|r| r.first_interaction_z) {
                Some(mz) => out.deltas.push(HeightDelta {
                    query_id: q.episode_id.clone(),
                    query_skill: q.skill.clone(),
                    match_id: m.episode_id.clone(),
                    dz: mz - qz,
                }),
                None => out.skipped_matches += 1,
            }
        }
    }
    out
}

fn distances(queries: &[TrajectoryRecord], matches: &[Vec<SimilarityResult>]) -> DistanceDistribution {
    let per_query: Vec<QueryDistance> = queries
        .iter()
        .zip(matches)
        .filter(|(_, found)| !found.is_empty())
        .map(|(q, found)| QueryDistance {
            query_id: q.episode_id.clone(),
            query_skill: q.skill.clone(),
            mean_distance: found.iter().map(|m| m.distance).sum::<f64>() / found.len() as f64,
        })
        .collect();
    let means: Vec<f64> = per_query.iter().map(|q| q.mean_distance).collect();
    DistanceDistribution { median: median(&means), per_query }
}

/// Tally the skills of each query's top-k neighbours, grouped by query skill.
pub fn semantic_relevance(
    queries: &[TrajectoryRecord],
    dataset: &[TrajectoryRecord],
    k: usize,
    resample_n: Option<usize>,
) -> Result<SkillHistogram, SimilarityError> {
    Ok(histogram(queries, &retrieve_all(queries, dataset, k, resample_n)?))
}

/// Signed first-interaction height differences between each query and its
/// top-k neighbours. Trajectories without interaction events are skipped.
pub fn first_interaction_height_alignment(
    queries: &[TrajectoryRecord],
    dataset: &[TrajectoryRecord],
    k: usize,
    resample_n: Option<usize>,
) -> Result<HeightAlignment, SimilarityError> {
    Ok(height_deltas(queries, dataset, &retrieve_all(queries, dataset, k, resample_n)?))
}

/// Per-query mean top-k distance and the median of those means.
pub fn distance_distribution(
    queries: &[TrajectoryRecord],
    dataset: &[TrajectoryRecord],
    k: usize,
    resample_n: Option<usize>,
) -> Result<DistanceDistribution, SimilarityError> {
    Ok(distances(queries, &retrieve_all(queries, dataset, k, resample_n)?))
}

/// All three statistics from a single retrieval pass.
pub fn analyze(
    queries: &[TrajectoryRecord],
    dataset: &[TrajectoryRecord],
    k: usize,
    resample_n: Option<usize>,
) -> Result<AnalyticsReport, SimilarityError> {
    let matches = retrieve_all(queries, dataset, k, resample_n)?;
    Ok(AnalyticsReport {
        k,
        query_count: queries.len(),
        dataset_size: dataset.len(),
        skill_histogram: histogram(queries, &matches),
        height_alignment: height_deltas(queries, dataset, &matches),
        distances: distances(queries, &matches),
    })
}
