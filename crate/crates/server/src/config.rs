use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use trajsketch::geometry::{GeometryError, HeightRange};
use trajsketch::ingest::{DEFAULT_RESAMPLE_M, DEFAULT_SAMPLES_PER_SEGMENT};
use trajsketch::{InteractionConfig, RenderConfig};

pub const DATASET_ENV: &str = "TRAJSKETCH_DATASET";
pub const PORT_ENV: &str = "TRAJSKETCH_PORT";

/// Workspace-wide settings, read from a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkspaceConfig {
    pub h_min: f64,
    pub h_max: f64,
    pub epsilon: InteractionConfig,
    pub render: RenderConfig,
    pub dataset_path: Option<PathBuf>,
    /// Camera used for episodes whose log carries no `camera_ref`.
    pub camera_path: Option<PathBuf>,
    pub scenes_dir: Option<PathBuf>,
    /// Stroke resampling density for drawn sketches.
    pub resample_m: usize,
    pub samples_per_segment: usize,
    /// Default arc-length resampling for similarity queries.
    pub resample_n: Option<usize>,
    /// Datasets larger than this stream query progress.
    pub stream_threshold: usize,
    pub port: u16,
}

impl Default for WorkspaceConfig {
    fn default() -> Self {
        Self {
            h_min: 0.0,
            h_max: 1.0,
            epsilon: InteractionConfig::default(),
            render: RenderConfig::default(),
            dataset_path: None,
            camera_path: None,
            scenes_dir: None,
            resample_m: DEFAULT_RESAMPLE_M,
            samples_per_segment: DEFAULT_SAMPLES_PER_SEGMENT,
            resample_n: None,
            stream_threshold: 20_000,
            port: 8080,
        }
    }
}

impl WorkspaceConfig {
    pub fn heights(&self) -> Result<HeightRange, GeometryError> {
        HeightRange::new(self.h_min, self.h_max)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.heights()?;
        self.render.validate()?;
        anyhow::ensure!(self.resample_m >= 2, "resample_m must be at least 2");
        anyhow::ensure!(self.samples_per_segment >= 1, "samples_per_segment must be at least 1");
        anyhow::ensure!(self.resample_n != Some(0), "resample_n must be at least 1");
        Ok(())
    }

    /// Load from `path` (or defaults), then apply environment overrides.
    /// Relative paths inside the file resolve against the file's directory.
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                let mut cfg: WorkspaceConfig =
                    serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?;
                let dir = p.parent().unwrap_or(Path::new("."));
                for slot in [&mut cfg.dataset_path, &mut cfg.camera_path, &mut cfg.scenes_dir] {
                    if let Some(rel) = slot.as_ref().filter(|p| p.is_relative()) {
                        *slot = Some(dir.join(rel));
                    }
                }
                cfg
            }
            None => WorkspaceConfig::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) -> anyhow::Result<()> {
        if let Some(d) = get(DATASET_ENV) {
            self.dataset_path = Some(PathBuf::from(d));
        }
        if let Some(p) = get(PORT_ENV) {
            self.port = p.parse().with_context(|| format!("{PORT_ENV}={p} is not a port"))?;
        }
        Ok(())
    }
}
