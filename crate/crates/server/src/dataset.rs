//! Episode datasets on disk: a directory of `*.jsonl` episode logs, with
//! camera files referenced by each log header (relative to the directory).

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use trajsketch::ingest::read_episode_log;
use trajsketch::similarity::TrajectoryRecord;
use trajsketch::{CameraModel, EpisodeTrajectory, InteractionConfig};

/// Episode log files of a directory in file-name order.
pub fn episode_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading dataset directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn load_camera(path: &Path) -> anyhow::Result<CameraModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading camera {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing camera {}", path.display()))
}

/// Resolves and caches camera files for episodes.
pub struct CameraResolver {
    root: PathBuf,
    fallback: Option<PathBuf>,
    cache: HashMap<PathBuf, CameraModel>,
}

impl CameraResolver {
    pub fn new(root: &Path, fallback: Option<&Path>) -> Self {
        Self { root: root.to_path_buf(), fallback: fallback.map(Path::to_path_buf), cache: HashMap::new() }
    }

    pub fn camera_for(&mut self, ep: &EpisodeTrajectory) -> anyhow::Result<CameraModel> {
        let path = match (&ep.camera_ref, &self.fallback) {
            (Some(r), _) => self.root.join(r),
            (None, Some(f)) => f.clone(),
            (None, None) => bail!("episode {} has no camera_ref and no default camera is configured", ep.episode_id),
        };
        if let Some(c) = self.cache.get(&path) {
            return Ok(c.clone());
        }
        let cam = load_camera(&path)?;
        self.cache.insert(path, cam.clone());
        Ok(cam)
    }
}

/// Load every episode of a directory. Any unreadable log or duplicate
/// episode id is an error.
pub fn load_episodes(dir: &Path) -> anyhow::Result<Vec<EpisodeTrajectory>> {
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for file in episode_files(dir)? {
        let ep = read_episode_log(&file).with_context(|| format!("loading {}", file.display()))?;
        if let Some(prev) = seen.insert(ep.episode_id.clone(), file.clone()) {
            bail!("episode id {} appears in both {} and {}", ep.episode_id, prev.display(), file.display());
        }
        out.push(ep);
    }
    Ok(out)
}

pub fn records(episodes: &[EpisodeTrajectory], cfg: InteractionConfig) -> Vec<TrajectoryRecord> {
    episodes.iter().map(|e| TrajectoryRecord::from_episode(e, cfg)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub episodes: usize,
    pub total_steps: usize,
    pub mean_length: f64,
    pub min_length: usize,
    pub max_length: usize,
    pub skills: BTreeMap<String, usize>,
    /// Episodes with at least one gripper interaction.
    pub with_interactions: usize,
}

impl DatasetStats {
    pub fn compute(episodes: &[EpisodeTrajectory], records: &[TrajectoryRecord]) -> Self {
        let lengths: Vec<usize> = episodes.iter().map(EpisodeTrajectory::len).collect();
        let total: usize = lengths.iter().sum();
        let mut skills = BTreeMap::new();
        for e in episodes {
            *skills.entry(e.skill.clone()).or_insert(0) += 1;
        }
        Self {
            episodes: episodes.len(),
            total_steps: total,
            mean_length: if lengths.is_empty() { 0.0 } else { total as f64 / lengths.len() as f64 },
            min_length: lengths.iter().copied().min().unwrap_or(0),
            max_length: lengths.iter().copied().max().unwrap_or(0),
            skills,
            with_interactions: records.iter().filter(|r| r.first_interaction_z.is_some()).count(),
        }
    }
}

/// Immutable dataset snapshot shared by all requests.
#[derive(Debug, Clone)]
pub struct DatasetSnapshot {
    pub episodes: Vec<EpisodeTrajectory>,
    pub records: Vec<TrajectoryRecord>,
    pub stats: DatasetStats,
}

impl DatasetSnapshot {
    pub fn new(episodes: Vec<EpisodeTrajectory>, cfg: InteractionConfig) -> Self {
        let records = records(&episodes, cfg);
        let stats = DatasetStats::compute(&episodes, &records);
        Self { episodes, records, stats }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), InteractionConfig::default())
    }

    pub fn load(dir: &Path, cfg: InteractionConfig) -> anyhow::Result<Self> {
        Ok(Self::new(load_episodes(dir)?, cfg))
    }

    pub fn record(&self, episode_id: &str) -> Option<&TrajectoryRecord> {
        self.records.iter().find(|r| r.episode_id == episode_id)
    }
}

/// Scene description file: `{"camera_ref": "...", "image": "..."}` or with
/// an inline `camera`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    #[serde(default)]
    camera: Option<CameraModel>,
    #[serde(default)]
    camera_ref: Option<PathBuf>,
    image: PathBuf,
}

/// The initial camera observation of an evaluation scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub scene_id: String,
    pub camera: CameraModel,
    pub image_png: Vec<u8>,
}

fn png_size(bytes: &[u8]) -> anyhow::Result<(u32, u32)> {
    let reader = png::Decoder::new(std::io::Cursor::new(bytes)).read_info()?;
    let info = reader.info();
    Ok((info.width, info.height))
}

impl Scene {
    pub fn new(scene_id: impl Into<String>, camera: CameraModel, image_png: Vec<u8>) -> anyhow::Result<Self> {
        let scene_id = scene_id.into();
        let (w, h) = png_size(&image_png).with_context(|| format!("scene {scene_id}: reading image"))?;
        if (w, h) != (camera.width(), camera.height()) {
            bail!("scene {scene_id}: image is {w}x{h} but camera is {}x{}", camera.width(), camera.height());
        }
        Ok(Self { scene_id, camera, image_png })
    }
}

pub const SCENE_SUFFIX: &str = ".scene.json";

/// Load every `{id}.scene.json` description in `dir`. Camera files and
/// images referenced from them resolve relative to `dir`.
pub fn load_scenes(dir: &Path) -> anyhow::Result<BTreeMap<String, Scene>> {
    let mut out = BTreeMap::new();
    let mut files: Vec<(String, PathBuf)> = std::fs::read_dir(dir)
        .with_context(|| format!("reading scenes directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter_map(|p| {
            let id = p.file_name()?.to_str()?.strip_suffix(SCENE_SUFFIX)?.to_string();
            Some((id, p))
        })
        .collect();
    files.sort();
    for (id, f) in files {
        let desc: SceneFile = serde_json::from_str(&std::fs::read_to_string(&f)?)
            .with_context(|| format!("parsing scene {}", f.display()))?;
        let camera = match (desc.camera, desc.camera_ref) {
            (Some(c), _) => c,
            (None, Some(r)) => load_camera(&dir.join(r))?,
            (None, None) => bail!("scene {id} has neither camera nor camera_ref"),
        };
        let image = std::fs::read(dir.join(&desc.image)).with_context(|| format!("scene {id}: image"))?;
        out.insert(id.clone(), Scene::new(id, camera, image)?);
    }
    Ok(out)
}
