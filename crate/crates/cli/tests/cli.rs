use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use objremove_core::prompts::{ForegroundPoint, PromptSet};
use objremove_core::scenegen::{SceneSpec, SyntheticScene};
use objremove_core::image_io::save_rgb;
use objremove_core::{Point, Rgb, RgbImage};

fn objremove(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_objremove"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &Path, seed: &str) -> PathBuf {
    let out = objremove(&["generate-scene", "--out", s(dir), "--seed", seed, "--views", "6", "--width", "256", "--height", "256"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    PathBuf::from(String::from_utf8(out.stdout).unwrap().trim())
}

fn digest(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn write_prompts(scene_dir: &Path, view_index: usize) -> PathBuf {
    let spec: SceneSpec = serde_json::from_slice(&std::fs::read(scene_dir.join("scene.json")).unwrap()).unwrap();
    let scene = SyntheticScene::new(spec).unwrap();
    let h = scene.plane_to_view(view_index.min(scene.n_views() - 1));
    let foreground = scene
        .spec()
        .objects
        .iter()
        .enumerate()
        .map(|(k, o)| {
            let c = h.apply(Point::new(o.center[0], o.center[1])).unwrap();
            ForegroundPoint {
                x: c.x.round() as u32,
                y: c.y.round() as u32,
                object_id: k as u32 + 1,
            }
        })
        .collect();
    let prompts = PromptSet {
        view_index,
        foreground,
        background: vec![],
        region: None,
    };
    let path = scene_dir.join(format!("prompts_{view_index}.json"));
    std::fs::write(&path, serde_json::to_vec(&prompts).unwrap()).unwrap();
    path
}

#[test]
fn generate_scene_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let manifest = generate(a.path(), "17");
    assert_eq!(manifest, a.path().join("manifest.json"));
    assert!(a.path().join("gt/homographies.json").exists());
    generate(b.path(), "17");
    assert_eq!(digest(a.path()), digest(b.path()));
}

#[test]
fn generate_scene_reads_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SceneSpec::standard(3, 3, 128, 96, 1);
    let spec_path = dir.path().join("spec.json");
    std::fs::write(&spec_path, serde_json::to_vec(&spec).unwrap()).unwrap();
    let out = dir.path().join("scene");
    let r = objremove(&["generate-scene", s(&spec_path), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(0));
    assert!(out.join("views/view_2.png").exists());
}

#[test]
fn generate_scene_missing_spec_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let r = objremove(&["generate-scene", s(&missing), "--out", s(dir.path())]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("nope.json"));
}

#[test]
fn generate_scene_rejects_invalid_spec() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = SceneSpec::standard(3, 3, 128, 96, 1);
    spec.n_views = 1;
    let spec_path = dir.path().join("spec.json");
    std::fs::write(&spec_path, serde_json::to_vec(&spec).unwrap()).unwrap();
    let r = objremove(&["generate-scene", s(&spec_path), "--out", s(dir.path())]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn run_then_eval() {
    let scene = tempfile::tempdir().unwrap();
    let manifest = generate(scene.path(), "5");
    let prompts = write_prompts(scene.path(), 2);
    let run_dir = scene.path().join("run");
    let r = objremove(&["run", "--manifest", s(&manifest), "--prompts", s(&prompts), "--out", s(&run_dir), "--seed", "1"]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(run_dir.join("export/manifest.json").exists());
    assert!(run_dir.join("timings.json").exists());

    let e = objremove(&["eval", s(&run_dir), s(&scene.path().join("gt"))]);
    assert_eq!(e.status.code(), Some(0), "{}", String::from_utf8_lossy(&e.stderr));
    let line = String::from_utf8(e.stdout).unwrap();
    assert!(line.starts_with("views=6 mask_iou="), "{line}");
    assert!(run_dir.join("eval/report.json").exists());
    assert!(run_dir.join("eval/report.csv").exists());
    // The pipeline's own report is left untouched.
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(run_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["source_index"], 2);
}

#[test]
fn eval_of_ground_truth_copy_is_perfect() {
    let scene = tempfile::tempdir().unwrap();
    let manifest = generate(scene.path(), "8");
    let prompts = write_prompts(scene.path(), 0);
    let run_dir = scene.path().join("run");
    let r = objremove(&["run", "--manifest", s(&manifest), "--prompts", s(&prompts), "--out", s(&run_dir)]);
    assert_eq!(r.status.code(), Some(0));
    let gt = scene.path().join("gt");
    for j in 0..6 {
        std::fs::copy(gt.join(format!("clean/view_{j}.png")), run_dir.join(format!("inpainted/view_{j}.png"))).unwrap();
        for k in 1..=3 {
            let name = format!("view_{j}_obj_{k}.png");
            std::fs::copy(gt.join("masks").join(&name), run_dir.join("masks").join(&name)).unwrap();
        }
    }
    let e = objremove(&["eval", s(&run_dir), s(&gt)]);
    assert_eq!(e.status.code(), Some(0));
    let line = String::from_utf8(e.stdout).unwrap();
    assert_eq!(
        line.trim(),
        "views=6 mask_iou=1.0000 psnr_db=99.0000 psnr_masked_db=99.0000 ssim=1.0000 ssim_masked=1.0000"
    );
}

#[test]
fn eval_without_ground_truth_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let r = objremove(&["eval", s(dir.path()), s(&dir.path().join("missing_gt"))]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("missing_gt"));
}

#[test]
fn out_of_range_source_aborts_with_report() {
    let scene = tempfile::tempdir().unwrap();
    let manifest = generate(scene.path(), "5");
    let prompts = write_prompts(scene.path(), 9);
    let run_dir = scene.path().join("run");
    let r = objremove(&["run", "--manifest", s(&manifest), "--prompts", s(&prompts), "--out", s(&run_dir)]);
    assert_eq!(r.status.code(), Some(4));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(run_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "aborted");
    assert!(report["error"].as_str().unwrap().contains('9'));
}

#[test]
fn unreliable_pair_exits_degraded() {
    let scene = tempfile::tempdir().unwrap();
    let manifest = generate(scene.path(), "5");
    let prompts = write_prompts(scene.path(), 0);
    // A featureless view cannot be matched to its neighbours.
    let flat = RgbImage::from_pixel(256, 256, Rgb([128, 128, 128]));
    save_rgb(&flat, &scene.path().join("views/view_4.png")).unwrap();
    let run_dir = scene.path().join("run");
    let r = objremove(&["run", "--manifest", s(&manifest), "--prompts", s(&prompts), "--out", s(&run_dir)]);
    assert_eq!(r.status.code(), Some(3), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(String::from_utf8_lossy(&r.stderr).contains("degraded views: [4, 5]"));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(run_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["degraded_views"], serde_json::json!([4, 5]));
    assert!(run_dir.join("inpainted/view_5.png").exists());
}

#[test]
fn malformed_config_is_input_error() {
    let scene = tempfile::tempdir().unwrap();
    let manifest = generate(scene.path(), "5");
    let prompts = write_prompts(scene.path(), 0);
    let config = scene.path().join("config.json");
    std::fs::write(&config, r#"{"key_view_interval": 0}"#).unwrap();
    let r = objremove(&[
        "run",
        "--manifest",
        s(&manifest),
        "--prompts",
        s(&prompts),
        "--config",
        s(&config),
        "--out",
        s(&scene.path().join("run")),
    ]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn serve_fails_when_port_taken() {
    let scene = tempfile::tempdir().unwrap();
    let manifest = generate(scene.path(), "5");
    let held = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = held.local_addr().unwrap().port().to_string();
    let r = objremove(&["serve", "--manifest", s(&manifest), "--port", &port, "--out", s(&scene.path().join("runs"))]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("cannot bind"));
}
