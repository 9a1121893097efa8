mod common;

use std::path::Path;
use std::process::Command;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trajsketch::geometry::project_trajectory;
use trajsketch::interaction::detect_key_steps;
use trajsketch::sketch::{decode_markers, SketchImage};
use trajsketch::{InteractionConfig, Vec3};
use trajsketch_server::config::WorkspaceConfig;
use trajsketch_server::label::{run_label, Manifest, MANIFEST_FILE};

fn three_episodes(dir: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let eps: Vec<_> = (0..3).map(|i| random_episode(&mut rng, &format!("ep{i}"), "pick", 30)).collect();
    write_dataset(dir, &eps);
}

fn pngs(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".png"))
        .collect();
    v.sort();
    v
}

#[test]
fn three_valid_episodes() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, out) = (tmp.path().join("data"), tmp.path().join("out"));
    three_episodes(&data);
    let cfg = WorkspaceConfig::default();
    let manifest = run_label(&data, &out, &cfg).unwrap();
    assert_eq!(manifest.episodes.len(), 3);
    assert!(manifest.failures.is_empty());
    assert_eq!(pngs(&out).len(), 6);
    let on_disk: Manifest = serde_json::from_slice(&std::fs::read(out.join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(on_disk, manifest);

    let row = &manifest.episodes[0];
    assert_eq!(row.sketch_2d, "ep0_2d.png");
    assert_eq!(row.path.vertices, 30);
    assert_eq!(row.events.len(), 2);

    // the 2.5D image carries the detected events where the episode projects
    let ep = trajsketch::ingest::read_episode_log(&data.join("ep0.jsonl")).unwrap();
    assert_eq!(row.events, detect_key_steps(&ep, InteractionConfig::default()).unwrap());
    let img = SketchImage::from_png(&std::fs::read(out.join(&row.sketch_2_5d)).unwrap()).unwrap();
    assert_eq!((img.width(), img.height()), (cfg.render.width, cfg.render.height));
    let path = project_trajectory(&overhead(), &ep, cfg.heights().unwrap()).unwrap().path.scaled(0.5, 0.5);
    let markers = decode_markers(&img);
    assert_eq!(markers.len(), 2);
    for e in &row.events {
        let v = path.vertex_for_step(e.step).unwrap();
        let m = markers.iter().find(|m| m.kind == e.kind).unwrap();
        assert!((m.x - v.u).hypot(m.y - v.v) <= f64::from(cfg.render.marker_radius));
    }

    // 2D and 2.5D differ only in green
    let flat = SketchImage::from_png(&std::fs::read(out.join(&row.sketch_2d)).unwrap()).unwrap();
    for (a, b) in flat.as_raw().chunks(3).zip(img.as_raw().chunks(3)) {
        assert_eq!((a[0], a[2]), (b[0], b[2]));
    }
}

#[test]
fn behind_camera_episode_fails_alone() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, out) = (tmp.path().join("data"), tmp.path().join("out"));
    three_episodes(&data);
    let above: Vec<Vec3> = (0..5).map(|i| Vec3::new(0.5, 0.1 * i as f64, 2.5)).collect();
    write_dataset(&data, &[episode("ep1", "pick", &above, None)]);

    let manifest = run_label(&data, &out, &WorkspaceConfig::default()).unwrap();
    assert_eq!(manifest.episodes.len(), 2);
    assert_eq!(manifest.failures.len(), 1);
    assert_eq!(manifest.failures[0].episode_id.as_deref(), Some("ep1"));
    assert_eq!(pngs(&out).len(), 4);

    let status = Command::new(env!("CARGO_BIN_EXE_trajsketch"))
        .args(["label", "--dataset"])
        .arg(&data)
        .arg("--out")
        .arg(tmp.path().join("out2"))
        .env("RUST_LOG", "off")
        .status()
        .unwrap();
    assert!(!status.success());
    assert_eq!(pngs(&tmp.path().join("out2")).len(), 4);
}

#[test]
fn rerun_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    three_episodes(&data);
    let run = |out: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_trajsketch"))
            .args(["label", "--dataset"])
            .arg(&data)
            .arg("--out")
            .arg(tmp.path().join(out))
            .env("RUST_LOG", "off")
            .status()
            .unwrap();
        assert!(status.success());
    };
    run("a");
    run("b");
    run("a");
    let a = tmp.path().join("a");
    let names = pngs(&a);
    assert_eq!(names.len(), 6);
    for n in names.iter().map(String::as_str).chain([MANIFEST_FILE]) {
        assert_eq!(std::fs::read(a.join(n)).unwrap(), std::fs::read(tmp.path().join("b").join(n)).unwrap(), "{n}");
    }
}

#[test]
fn unresolvable_camera_and_bad_log_are_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, out) = (tmp.path().join("data"), tmp.path().join("out"));
    three_episodes(&data);
    let pts = [Vec3::new(0.5, 0.0, 0.5), Vec3::new(0.6, 0.0, 0.5)];
    let lost = episode("lost", "pick", &pts, None).with_camera_ref("missing.json");
    std::fs::write(data.join("lost.jsonl"), trajsketch::ingest::write_episode_log(&lost)).unwrap();
    std::fs::write(data.join("zz_broken.jsonl"), "{not json\n").unwrap();
    let manifest = run_label(&data, &out, &WorkspaceConfig::default()).unwrap();
    assert_eq!(manifest.episodes.len(), 3);
    let files: Vec<&str> = manifest.failures.iter().map(|f| f.file.as_str()).collect();
    assert_eq!(files, ["lost.jsonl", "zz_broken.jsonl"]);
    assert_eq!(manifest.failures[1].episode_id, None);
}

#[test]
fn default_camera_from_config() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, out) = (tmp.path().join("data"), tmp.path().join("out"));
    std::fs::create_dir_all(&data).unwrap();
    write_camera(tmp.path(), "cam.json", &overhead());
    let pts: Vec<Vec3> = (0..6).map(|i| Vec3::new(0.4 + 0.05 * i as f64, 0.0, 0.3)).collect();
    let mut ep = episode("solo", "wipe", &pts, Some((1, 3)));
    ep.camera_ref = None;
    std::fs::write(data.join("solo.jsonl"), trajsketch::ingest::write_episode_log(&ep)).unwrap();

    let cfg_path = tmp.path().join("workspace.json");
    std::fs::write(&cfg_path, r#"{"camera_path": "cam.json", "render": {"width": 160, "height": 128}}"#).unwrap();
    let cfg = WorkspaceConfig::load(Some(&cfg_path)).unwrap();
    let manifest = run_label(&data, &out, &cfg).unwrap();
    assert!(manifest.failures.is_empty(), "{:?}", manifest.failures);
    let img = SketchImage::from_png(&std::fs::read(out.join("solo_2d.png")).unwrap()).unwrap();
    assert_eq!((img.width(), img.height()), (160, 128));
}
