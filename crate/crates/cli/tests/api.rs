use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use objremove_cli::server::{router, AppState, Job, JobState, ObjectMask, SegmentResponse, ViewInfo};
use objremove_core::manifest::ViewSet;
use objremove_core::mask::{iou, RleMask};
use objremove_core::oracles::Oracles;
use objremove_core::pipeline::{PipelineConfig, Stage};
use objremove_core::scenegen::{RenderedView, SceneSpec, Shape, SyntheticScene};
use objremove_core::{BinaryMask, Point};
use serde_json::{json, Value};
use tower::ServiceExt;

struct Fixture {
    app: Router,
    scene: SyntheticScene,
    rendered: Vec<RenderedView>,
    _out: tempfile::TempDir,
}

fn fixture(n_views: usize, size: u32) -> Fixture {
    let scene = SyntheticScene::new(SceneSpec::standard(21, n_views, size, size, 2)).unwrap();
    let rendered: Vec<_> = (0..n_views).map(|j| scene.render(j)).collect();
    let vs = ViewSet::from_images(rendered.iter().map(|r| r.image.clone()).collect(), 0).unwrap();
    let out = tempfile::tempdir().unwrap();
    let state = AppState::new(vs, PipelineConfig::default(), Oracles::builtin(), out.path().to_path_buf());
    Fixture {
        app: router(state),
        scene,
        rendered,
        _out: out,
    }
}

async fn send(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn get_json<T: serde::de::DeserializeOwned>(app: &Router, uri: &str) -> T {
    let (status, body) = send(app, "GET", uri, None).await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&body));
    serde_json::from_slice(&body).unwrap()
}

fn error_code(body: &[u8]) -> String {
    let v: Value = serde_json::from_slice(body).unwrap();
    v["error"]["code"].as_str().unwrap().to_owned()
}

fn center(f: &Fixture, view: usize, k: usize) -> (u32, u32) {
    let o = &f.scene.spec().objects[k];
    let c = f.scene.plane_to_view(view).apply(Point::new(o.center[0], o.center[1])).unwrap();
    (c.x.round() as u32, c.y.round() as u32)
}

fn prompts(f: &Fixture, view: usize) -> Value {
    let foreground: Vec<Value> = (0..f.scene.spec().objects.len())
        .map(|k| {
            let (x, y) = center(f, view, k);
            json!({ "x": x, "y": y, "object_id": k + 1 })
        })
        .collect();
    json!({ "view_index": view, "foreground": foreground })
}

#[tokio::test]
async fn lists_every_view_with_dimensions() {
    let f = fixture(20, 96);
    let views: Vec<ViewInfo> = get_json(&f.app, "/api/views").await;
    assert_eq!(views.len(), 20);
    assert!(views.iter().enumerate().all(|(i, v)| v.index == i && v.width == 96 && v.height == 96));
}

#[tokio::test]
async fn view_image_is_png() {
    let f = fixture(3, 64);
    let (status, body) = send(&f.app, "GET", "/api/views/1/image", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(&body[..8], b"\x89PNG\r\n\x1a\n");
    let (status, body) = send(&f.app, "GET", "/api/views/3/image", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(error_code(&body), "view_out_of_range");
}

#[tokio::test]
async fn segment_click_on_disk_returns_disk() {
    let f = fixture(3, 256);
    assert!(matches!(f.scene.spec().objects[0].shape, Shape::Disk { .. }));
    let (x, y) = center(&f, 1, 0);
    let body = json!({ "foreground": [{ "x": x, "y": y, "object_id": 1 }], "background": [] });
    let (status, bytes) = send(&f.app, "POST", "/api/views/1/segment", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&bytes));
    let resp: SegmentResponse = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(resp.masks.len(), 1);
    assert_eq!(resp.masks[0].object_id, 1);
    let mask = BinaryMask::try_from(&resp.masks[0].rle).unwrap();
    assert!(mask.get(x, y));
    let gt = &f.rendered[1].masks[0];
    assert!(iou(&mask, gt).unwrap() >= 0.98);
}

#[tokio::test]
async fn segment_rejects_bad_prompts() {
    let f = fixture(3, 64);
    let body = json!({ "foreground": [{ "x": 500, "y": 1, "object_id": 1 }] });
    let (status, bytes) = send(&f.app, "POST", "/api/views/0/segment", Some(body)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(error_code(&bytes), "invalid_prompts");

    let (status, bytes) = send(&f.app, "POST", "/api/views/0/segment", Some(json!({ "fg": [] }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(error_code(&bytes), "bad_request");
}

async fn wait_done(app: &Router, id: &str) -> Job {
    for _ in 0..600 {
        let job: Job = get_json(app, &format!("/api/jobs/{id}")).await;
        if matches!(job.state, JobState::Done | JobState::Failed) {
            return job;
        }
        tokio::time::sleep(Duration::from_millis(50)).await;
    }
    panic!("job {id} did not finish");
}

#[tokio::test]
async fn propagation_jobs_run_one_at_a_time() {
    let f = fixture(6, 192);
    let mut ids = Vec::new();
    for _ in 0..2 {
        let (status, bytes) = send(&f.app, "POST", "/api/propagate", Some(json!({ "prompts": prompts(&f, 0) }))).await;
        assert_eq!(status, StatusCode::ACCEPTED, "{}", String::from_utf8_lossy(&bytes));
        let v: Value = serde_json::from_slice(&bytes).unwrap();
        ids.push(v["job_id"].as_str().unwrap().to_owned());
    }
    assert_ne!(ids[0], ids[1]);

    let mut last_progress = None;
    loop {
        let first: Job = get_json(&f.app, &format!("/api/jobs/{}", ids[0])).await;
        let second: Job = get_json(&f.app, &format!("/api/jobs/{}", ids[1])).await;
        if first.state == JobState::Done {
            break;
        }
        assert_ne!(first.state, JobState::Failed, "{:?}", first.error);
        assert_eq!(second.state, JobState::Queued);
        let p = (first.progress.stage, first.progress.views_done);
        assert!(last_progress.is_none_or(|l| l <= p));
        last_progress = Some(p);
        tokio::time::sleep(Duration::from_millis(5)).await;
    }
    let first = wait_done(&f.app, &ids[0]).await;
    assert_eq!(first.progress.stage, Stage::Done);
    assert!(first.result_path.as_ref().unwrap().join("report.json").exists());
    let second = wait_done(&f.app, &ids[1]).await;
    assert_eq!(second.state, JobState::Done);

    let masks: Vec<ObjectMask> = get_json(&f.app, "/api/results/5/masks").await;
    assert_eq!(masks.iter().map(|m| m.object_id).collect::<Vec<_>>(), vec![1, 2]);
    for m in &masks {
        let mask = BinaryMask::try_from(&m.rle).unwrap();
        let gt = &f.rendered[5].masks[m.object_id as usize - 1];
        assert!(iou(&mask, gt).unwrap() > 0.9);
        assert_eq!(RleMask::from(&mask), m.rle);
    }
    let (status, body) = send(&f.app, "GET", "/api/results/5/image", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(&body[..4], b"\x89PNG");
}

#[tokio::test]
async fn results_before_any_job_are_not_found() {
    let f = fixture(3, 64);
    let (status, body) = send(&f.app, "GET", "/api/results/0/masks", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(error_code(&body), "no_result");
    let (status, body) = send(&f.app, "GET", "/api/jobs/job-99", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(error_code(&body), "job_not_found");
}

#[tokio::test]
async fn propagate_validates_before_queueing() {
    let f = fixture(3, 64);
    let mut out_of_range = prompts(&f, 0);
    out_of_range["view_index"] = json!(7);
    let (status, body) = send(&f.app, "POST", "/api/propagate", Some(json!({ "prompts": out_of_range }))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(error_code(&body), "view_out_of_range");
    let bad = json!({ "prompts": prompts(&f, 0), "config": { "key_view_interval": 0 } });
    let (status, body) = send(&f.app, "POST", "/api/propagate", Some(bad)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(error_code(&body), "invalid_config");
    let (status, body) = send(&f.app, "GET", "/api/nothing", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(error_code(&body), "not_found");
}
