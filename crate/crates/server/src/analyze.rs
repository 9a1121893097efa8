//! Motion-generalization report: skill relevance, first-interaction height
//! alignment and the distance distribution of each query's neighbours.

use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use trajsketch::similarity::{analyze, AnalyticsReport, TrajectoryRecord};

use crate::config::WorkspaceConfig;
use crate::dataset::{load_episodes, records};
use crate::plot::{histogram_svg, relevance_svg};

pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub k: usize,
    /// Histogram bin width in meters.
    pub bin_width: f64,
    pub resample_n: Option<usize>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self { k: 10, bin_width: 0.02, resample_n: None }
    }
}

/// Effective neighbour count: `k` capped at the dataset size.
pub fn effective_k(k: usize, dataset_size: usize) -> usize {
    if k > dataset_size {
        log::warn!("k = {k} exceeds the dataset size {dataset_size}; using the full dataset");
    }
    k.min(dataset_size)
}

pub fn build_report(
    queries: &[TrajectoryRecord],
    dataset: &[TrajectoryRecord],
    opts: &AnalyzeOptions,
) -> anyhow::Result<AnalyticsReport> {
    anyhow::ensure!(opts.k >= 1, "k must be at least 1");
    anyhow::ensure!(!dataset.is_empty(), "dataset is empty");
    let k = effective_k(opts.k, dataset.len());
    Ok(analyze(queries, dataset, k, opts.resample_n)?)
}

fn csv_bytes<T: Serialize>(rows: impl IntoIterator<Item = T>) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner()?)
}

#[derive(Serialize)]
struct RelevanceRow<'a> {
    query_skill: &'a str,
    match_skill: &'a str,
    count: usize,
    fraction: f64,
}

/// Write `report.json`, three CSV tables and three SVG figures into `out`.
pub fn write_outputs(report: &AnalyticsReport, out: &Path, bin_width: f64) -> anyhow::Result<()> {
    anyhow::ensure!(bin_width > 0.0 && bin_width.is_finite(), "bin width must be positive");
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let put = |name: &str, bytes: &[u8]| {
        std::fs::write(out.join(name), bytes).with_context(|| format!("writing {name}"))
    };
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    put(REPORT_FILE, json.as_bytes())?;

    let relevance = report.skill_histogram.iter().flat_map(|(q, row)| {
        let total: usize = row.values().sum();
        row.iter().map(move |(m, &count)| RelevanceRow {
            query_skill: q,
            match_skill: m,
            count,
            fraction: count as f64 / total as f64,
        })
    });
    put("semantic_relevance.csv", &csv_bytes(relevance)?)?;
    put("height_alignment.csv", &csv_bytes(&report.height_alignment.deltas)?)?;
    put("distances.csv", &csv_bytes(&report.distances.per_query)?)?;

    put(
        "semantic_relevance.svg",
        relevance_svg(&format!("Skills of top-{} neighbours per query skill", report.k), &report.skill_histogram)
            .as_bytes(),
    )?;
    let dz: Vec<f64> = report.height_alignment.deltas.iter().map(|d| d.dz).collect();
    put(
        "height_alignment.svg",
        histogram_svg("First-interaction height difference", "dz (m)", &dz, bin_width, Some(0.0)).as_bytes(),
    )?;
    let means: Vec<f64> = report.distances.per_query.iter().map(|d| d.mean_distance).collect();
    put(
        "distances.svg",
        histogram_svg("Mean distance to neighbours", "Fréchet distance (m)", &means, bin_width, report.distances.median)
            .as_bytes(),
    )?;
    Ok(())
}

/// Load queries and dataset from episode-log directories, analyze, write.
pub fn run_analyze(
    queries_dir: &Path,
    dataset_dir: &Path,
    out: &Path,
    opts: &AnalyzeOptions,
    cfg: &WorkspaceConfig,
) -> anyhow::Result<AnalyticsReport> {
    let queries = records(&load_episodes(queries_dir)?, cfg.epsilon);
    let dataset = records(&load_episodes(dataset_dir)?, cfg.epsilon);
    let report = build_report(&queries, &dataset, opts)?;
    write_outputs(&report, out, opts.bin_width)?;
    Ok(report)
}
