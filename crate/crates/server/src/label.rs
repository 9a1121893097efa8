//! Batch hindsight labeling: one 2D and one 2.5D sketch per recorded episode.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use trajsketch::geometry::project_trajectory;
use trajsketch::ingest::read_episode_log;
use trajsketch::interaction::detect_key_steps;
use trajsketch::sketch::rasterize;
use trajsketch::{EpisodeTrajectory, InteractionEvent, SketchMode, SketchSpec};

use crate::config::WorkspaceConfig;
use crate::dataset::{episode_files, CameraResolver};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStats {
    pub vertices: usize,
    /// Steps that projected behind the camera.
    pub dropped: usize,
    /// Polyline length in render pixels.
    pub pixel_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledEpisode {
    pub episode_id: String,
    pub skill: String,
    pub sketch_2d: String,
    pub sketch_2_5d: String,
    pub events: Vec<InteractionEvent>,
    /// Detected events whose step projected behind the camera.
    pub events_dropped: usize,
    pub path: PathStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelFailure {
    /// Log file name relative to the dataset directory.
    pub file: String,
    pub episode_id: Option<String>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub episodes: Vec<LabeledEpisode>,
    pub failures: Vec<LabelFailure>,
}

/// File-name-safe form of an episode id.
pub fn sanitize_id(id: &str) -> String {
    let s: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect();
    match s.trim_start_matches('.') {
        "" => "_".to_string(),
        _ => s,
    }
}

/// The two sketches of an episode at render resolution, plus bookkeeping.
pub struct EpisodeSketches {
    pub spec_2_5d: SketchSpec,
    pub events_dropped: usize,
    pub dropped_steps: usize,
    pub png_2d: Vec<u8>,
    pub png_2_5d: Vec<u8>,
}

pub fn label_episode(
    ep: &EpisodeTrajectory,
    camera: &trajsketch::CameraModel,
    cfg: &WorkspaceConfig,
) -> anyhow::Result<EpisodeSketches> {
    let projected = project_trajectory(camera, ep, cfg.heights()?)?;
    let sx = f64::from(cfg.render.width) / f64::from(camera.width());
    let sy = f64::from(cfg.render.height) / f64::from(camera.height());
    let path = projected.path.scaled(sx, sy);
    let detected = if ep.len() < 2 { Vec::new() } else { detect_key_steps(ep, cfg.epsilon)? };
    let (events, lost): (Vec<_>, Vec<_>) = detected.into_iter().partition(|e| path.vertex_for_step(e.step).is_some());
    if !lost.is_empty() {
        log::warn!("{}: {} interaction event(s) lie behind the camera", ep.episode_id, lost.len());
    }
    let spec = SketchSpec::new(path, events, SketchMode::TwoPointFiveD)?;
    let png_2d = rasterize(&spec.with_mode(SketchMode::TwoD), &cfg.render)?.to_png()?;
    let png_2_5d = rasterize(&spec, &cfg.render)?.to_png()?;
    Ok(EpisodeSketches {
        spec_2_5d: spec,
        events_dropped: lost.len(),
        dropped_steps: projected.dropped_count,
        png_2d,
        png_2_5d,
    })
}

/// Label every episode log in `dataset` into `out`. Per-episode failures are
/// logged and recorded in the manifest; the run continues past them.
pub fn run_label(dataset: &Path, out: &Path, cfg: &WorkspaceConfig) -> anyhow::Result<Manifest> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut cameras = CameraResolver::new(dataset, cfg.camera_path.as_deref());
    let mut manifest = Manifest { episodes: Vec::new(), failures: Vec::new() };
    let mut ids = HashSet::new();
    let mut stems = HashSet::new();

    for file in episode_files(dataset)? {
        let name = file.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let mut episode_id = None;
        let result = (|| -> anyhow::Result<LabeledEpisode> {
            let ep = read_episode_log(&file)?;
            episode_id = Some(ep.episode_id.clone());
            if !ids.insert(ep.episode_id.clone()) {
                bail!("duplicate episode id {}", ep.episode_id);
            }
            let stem = sanitize_id(&ep.episode_id);
            if !stems.insert(stem.clone()) {
                bail!("episode id {} collides with another after sanitizing to {stem}", ep.episode_id);
            }
            let camera = cameras.camera_for(&ep)?;
            let sk = label_episode(&ep, &camera, cfg)?;
            let (f2, f25) = (format!("{stem}_2d.png"), format!("{stem}_2.5d.png"));
            write(&out.join(&f2), &sk.png_2d)?;
            write(&out.join(&f25), &sk.png_2_5d)?;
            Ok(LabeledEpisode {
                episode_id: ep.episode_id.clone(),
                skill: ep.skill.clone(),
                sketch_2d: f2,
                sketch_2_5d: f25,
                events: sk.spec_2_5d.events.clone(),
                events_dropped: sk.events_dropped,
                path: PathStats {
                    vertices: sk.spec_2_5d.path.len(),
                    dropped: sk.dropped_steps,
                    pixel_length: sk.spec_2_5d.path.pixel_length(),
                },
            })
        })();
        match result {
            Ok(row) => manifest.episodes.push(row),
            Err(e) => {
                log::error!("{name}: {e:#}");
                manifest.failures.push(LabelFailure { file: name, episode_id, error: format!("{e:#}") });
            }
        }
    }
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write(&out.join(MANIFEST_FILE), text.as_bytes())?;
    Ok(manifest)
}

fn write(path: &PathBuf, bytes: &[u8]) -> anyhow::Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
