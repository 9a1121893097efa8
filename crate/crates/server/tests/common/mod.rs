#![allow(dead_code)]

use std::path::Path;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tower::ServiceExt;
use trajsketch::ingest::write_episode_log;
use trajsketch::interaction::{grasp_sequence_from_events, synthesize_gripper_signals};
use trajsketch::{CameraModel, EEState, EpisodeTrajectory, EventKind, Vec3};

pub const CAMERA_FILE: &str = "overhead.json";

/// Looks straight down from 2 m above (0.5, 0, 0); 640×512 image.
pub fn overhead() -> CameraModel {
    CameraModel::new(600.0, 600.0, 320.0, 256.0, [0.0, 1.0, 0.0, 0.0], Vec3::new(-0.5, 0.0, 2.0), 640, 512).unwrap()
}

pub fn write_camera(dir: &Path, name: &str, cam: &CameraModel) {
    std::fs::write(dir.join(name), serde_json::to_string_pretty(cam).unwrap()).unwrap();
}

/// Episode through `points`, grasping over `grasp` (inclusive step range).
pub fn episode(id: &str, skill: &str, points: &[Vec3], grasp: Option<(usize, usize)>) -> EpisodeTrajectory {
    let n = points.len();
    let events: Vec<(usize, EventKind)> = match grasp {
        Some((a, b)) if b + 1 < n => vec![(a, EventKind::Close), (b, EventKind::Open)],
        Some((a, _)) => vec![(a, EventKind::Close)],
        None => vec![],
    };
    let states = grasp_sequence_from_events(n, &events).unwrap();
    let steps = points
        .iter()
        .zip(synthesize_gripper_signals(&states))
        .enumerate()
        .map(|(i, (p, (s, t)))| EEState::new(i as u64, *p, s, t))
        .collect();
    EpisodeTrajectory::new(id, skill, format!("{skill} something"), steps)
        .unwrap()
        .with_camera_ref(CAMERA_FILE)
}

/// Smooth random reach-and-grasp motion inside the overhead camera's view.
pub fn random_episode(rng: &mut ChaCha8Rng, id: &str, skill: &str, len: usize) -> EpisodeTrajectory {
    let a = Vec3::new(rng.random_range(0.3..0.7), rng.random_range(-0.3..0.3), rng.random_range(0.1..0.9));
    let b = Vec3::new(rng.random_range(0.3..0.7), rng.random_range(-0.3..0.3), rng.random_range(0.1..0.9));
    let bow = rng.random_range(-0.1..0.1);
    let points: Vec<Vec3> = (0..len)
        .map(|i| {
            let t = i as f64 / (len - 1).max(1) as f64;
            a.lerp(b, t) + Vec3::new(0.0, bow * (std::f64::consts::PI * t).sin(), 0.0)
        })
        .collect();
    let grasp = (len >= 4).then(|| (len / 3, 2 * len / 3));
    episode(id, skill, &points, grasp)
}

pub fn write_dataset(dir: &Path, episodes: &[EpisodeTrajectory]) {
    std::fs::create_dir_all(dir).unwrap();
    write_camera(dir, CAMERA_FILE, &overhead());
    for e in episodes {
        std::fs::write(dir.join(format!("{}.jsonl", e.episode_id)), write_episode_log(e)).unwrap();
    }
}

pub async fn send(app: &Router, method: &str, uri: &str, body: Option<String>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b)).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

pub async fn send_json(app: &Router, method: &str, uri: &str, body: Option<String>) -> (StatusCode, serde_json::Value) {
    let (s, b) = send(app, method, uri, body).await;
    (s, serde_json::from_slice(&b).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&b))))
}
