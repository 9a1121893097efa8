mod common;

use std::collections::BTreeMap;

use axum::http::StatusCode;
use axum::Router;
use base64::Engine;
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use trajsketch::similarity::{top_k_similar, WaypointSeq};
use trajsketch::sketch::SketchImage;
use trajsketch::InteractionConfig;
use trajsketch_server::api::{router, AppState, QueryEvent, QueryResponse, RasterizeResponse, RolloutResponse};
use trajsketch_server::config::WorkspaceConfig;
use trajsketch_server::dataset::{load_scenes, DatasetSnapshot};

fn snapshot(n: usize) -> DatasetSnapshot {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let eps = (0..n).map(|i| random_episode(&mut rng, &format!("e{i:03}"), ["a", "b"][i % 2], 8 + i % 5)).collect();
    DatasetSnapshot::new(eps, InteractionConfig::default())
}

fn app_with(cfg: WorkspaceConfig, n: usize) -> (Router, DatasetSnapshot) {
    let data = snapshot(n);
    (router(AppState::new(cfg, data.clone(), BTreeMap::new())), data)
}

#[tokio::test]
async fn rasterize_returns_png_and_events() {
    let (app, _) = app_with(WorkspaceConfig::default(), 0);
    let body = json!({
        "samples": [[20.0, 30.0], [150.0, 90.0], [280.0, 60.0]],
        "marker_clicks": [{"pixel": [150.0, 92.0], "kind": "close"}, {"pixel": [279.0, 60.0], "kind": "open"}],
        "height_annotations": [{"pixel": [20.0, 30.0], "height": 0.4}, {"pixel": [280.0, 60.0], "height": 0.1}]
    });
    let (status, bytes) = send(&app, "POST", "/sketch/rasterize", Some(body.to_string())).await;
    assert_eq!(status, StatusCode::OK);
    let resp: RasterizeResponse = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(resp.events.len(), 2);
    assert_eq!(resp.spec.path.len(), 64);
    let png = base64::engine::general_purpose::STANDARD.decode(&resp.png_base64).unwrap();
    let img = SketchImage::from_png(&png).unwrap();
    assert_eq!((img.width(), img.height()), (320, 256));
    assert_eq!(trajsketch::sketch::decode_markers(&img).len(), 2);
}

#[tokio::test]
async fn query_returns_k_ranked() {
    let (app, data) = app_with(WorkspaceConfig::default(), 40);
    let (status, bytes) = send(&app, "POST", "/similarity/query", Some(json!({"episode_id": "e007"}).to_string())).await;
    assert_eq!(status, StatusCode::OK);
    let resp: QueryResponse = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(resp.results.len(), 10);
    assert_eq!(resp.results[0].episode_id, "e007");
    assert_eq!(resp.results[0].distance, 0.0);
    assert!(resp.results.windows(2).all(|w| w[0].distance <= w[1].distance));
    let direct = top_k_similar(&data.record("e007").unwrap().waypoints, &data.records, 10, None).unwrap();
    assert_eq!(resp.results, direct);
}

#[tokio::test]
async fn rollout_matches_library() {
    let (app, _) = app_with(WorkspaceConfig::default(), 0);
    let body = json!({
        "plan": [{"x": 0.5, "y": 0.0, "z": 0.5}, {"x": 0.6, "y": 0.1, "z": 0.2, "gripper": "close"}],
        "sim": {"max_speed": 0.4}
    });
    let (status, bytes) = send(&app, "POST", "/rollout", Some(body.to_string())).await;
    assert_eq!(status, StatusCode::OK);
    let resp: RolloutResponse = serde_json::from_slice(&bytes).unwrap();
    let req = serde_json::from_value(body).unwrap();
    let direct = trajsketch_server::api::run_rollout(&req, &WorkspaceConfig::default()).unwrap();
    assert_eq!(resp, direct);
    assert_eq!(resp.events.len(), 1);
    assert!(resp.roundtrip_error <= 0.4 * 0.05);
}

#[tokio::test]
async fn structured_errors() {
    let (app, _) = app_with(WorkspaceConfig::default(), 5);
    let cases = [
        ("/sketch/rasterize", "{not json".to_string(), StatusCode::BAD_REQUEST, "schema_error"),
        ("/sketch/rasterize", json!({"samples": [[1.0, 2.0]]}).to_string(), StatusCode::BAD_REQUEST, "bad_request"),
        ("/similarity/query", json!({"k": 3}).to_string(), StatusCode::BAD_REQUEST, "bad_request"),
        ("/similarity/query", json!({"episode_id": "nope"}).to_string(), StatusCode::NOT_FOUND, "not_found"),
        ("/similarity/query", json!({"episode_id": "e001", "k": 0}).to_string(), StatusCode::BAD_REQUEST, "bad_request"),
        ("/similarity/query", json!({"waypoints": []}).to_string(), StatusCode::BAD_REQUEST, "schema_error"),
        ("/rollout", json!({"plan": []}).to_string(), StatusCode::BAD_REQUEST, "schema_error"),
        (
            "/rollout",
            json!({"plan": [{"x": 0.5, "y": 0.0, "z": 0.5}, {"x": 3.0, "y": 0.0, "z": 0.5}], "sim": {"mode": "joint_space"}})
                .to_string(),
            StatusCode::UNPROCESSABLE_ENTITY,
            "unreachable",
        ),
    ];
    for (uri, body, want_status, want_code) in cases {
        let (status, v) = send_json(&app, "POST", uri, Some(body.clone())).await;
        assert_eq!(status, want_status, "{uri} {body}: {v}");
        assert_eq!(v["error"]["code"], want_code, "{uri} {body}: {v}");
        assert!(v["error"]["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
    let (status, v) = send_json(&app, "GET", "/scene/missing", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["code"], "not_found");
}

#[tokio::test]
async fn stats_reflect_snapshot() {
    let (app, data) = app_with(WorkspaceConfig::default(), 9);
    let (status, v) = send_json(&app, "GET", "/dataset/stats", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v, serde_json::to_value(&data.stats).unwrap());
    assert_eq!(v["episodes"], 9);
    assert_eq!(v["skills"]["a"], 5);
}

#[tokio::test]
async fn large_dataset_streams_progress() {
    let cfg = WorkspaceConfig { stream_threshold: 100, ..Default::default() };
    let (app, data) = app_with(cfg, 4500);
    let q = data.records[1234].waypoints.clone();
    let body = json!({"waypoints": q, "k": 7}).to_string();
    let (status, bytes) = send(&app, "POST", "/similarity/query", Some(body)).await;
    assert_eq!(status, StatusCode::OK);
    let events: Vec<QueryEvent> =
        String::from_utf8(bytes).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let (last, progress) = events.split_last().unwrap();
    let scanned: Vec<usize> = progress
        .iter()
        .map(|e| match e {
            QueryEvent::Progress { scanned, total } => {
                assert_eq!(*total, 4500);
                *scanned
            }
            other => panic!("{other:?}"),
        })
        .collect();
    assert_eq!(scanned, [2048, 4096, 4500]);
    let QueryEvent::Done(resp) = last else { panic!("{last:?}") };
    assert_eq!(resp.results, top_k_similar(&q, &data.records, 7, None).unwrap());
    assert_eq!(resp.results[0].episode_id, "e1234");
}

#[tokio::test]
async fn scene_endpoint_serves_camera_and_image() {
    let tmp = tempfile::tempdir().unwrap();
    let cam = overhead();
    write_camera(tmp.path(), "cam.json", &cam);
    let img = SketchImage::blank(cam.width(), cam.height()).to_png().unwrap();
    std::fs::write(tmp.path().join("table.png"), &img).unwrap();
    std::fs::write(tmp.path().join("kitchen.scene.json"), r#"{"camera_ref": "cam.json", "image": "table.png"}"#).unwrap();
    let scenes = load_scenes(tmp.path()).unwrap();
    assert_eq!(scenes.keys().collect::<Vec<_>>(), ["kitchen"]);

    let app = router(AppState::new(WorkspaceConfig::default(), DatasetSnapshot::empty(), scenes));
    let (status, v) = send_json(&app, "GET", "/scene/kitchen", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["scene_id"], "kitchen");
    assert_eq!(v["camera"], serde_json::to_value(&cam).unwrap());
    let png = base64::engine::general_purpose::STANDARD.decode(v["image_png_base64"].as_str().unwrap()).unwrap();
    assert_eq!(png, img);

    // an image whose size disagrees with the camera is rejected at load time
    std::fs::write(tmp.path().join("table.png"), SketchImage::blank(10, 10).to_png().unwrap()).unwrap();
    assert!(load_scenes(tmp.path()).is_err());
}

#[test]
fn query_waypoints_from_cli() {
    let tmp = tempfile::tempdir().unwrap();
    let data = snapshot(12);
    write_dataset(&tmp.path().join("data"), &data.episodes);
    let q: &WaypointSeq = &data.records[3].waypoints;
    std::fs::write(tmp.path().join("q.json"), serde_json::to_string(q).unwrap()).unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_trajsketch"))
        .arg("query")
        .arg("--waypoints")
        .arg(tmp.path().join("q.json"))
        .arg("--dataset")
        .arg(tmp.path().join("data"))
        .args(["--k", "3"])
        .env("RUST_LOG", "off")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let results: Vec<trajsketch::similarity::SimilarityResult> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(results, top_k_similar(q, &data.records, 3, None).unwrap());
}

#[test]
fn simulate_from_cli() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("plan.json"),
        r#"[{"x":0.5,"y":0.0,"z":0.5},{"x":0.5,"y":0.2,"z":0.3,"gripper":"close"},{"x":0.4,"y":0.2,"z":0.5}]"#,
    )
    .unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_trajsketch"))
        .arg("simulate")
        .arg("--plan")
        .arg(tmp.path().join("plan.json"))
        .arg("--episode-out")
        .arg(tmp.path().join("rollout.jsonl"))
        .env("RUST_LOG", "off")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let resp: RolloutResponse = serde_json::from_slice(&out.stdout).unwrap();
    let logged = trajsketch::ingest::read_episode_log(&tmp.path().join("rollout.jsonl")).unwrap();
    assert_eq!(logged, resp.episode);
    assert!(resp.roundtrip_error <= 0.5 * 0.05);
}
