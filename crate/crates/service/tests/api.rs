use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use inexa_core::fixtures;
use inexa_service::{router, AppState, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> (Arc<AppState>, axum::Router) {
    let state = AppState::new(ServiceConfig {
        default_threshold: 30,
        ..ServiceConfig::default()
    });
    (state.clone(), router(state))
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: impl Into<Body>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri).body(body.into()).unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn json_call(app: &axum::Router, method: &str, uri: &str, body: impl Into<Body>) -> (StatusCode, Value) {
    let (s, b) = call(app, method, uri, body).await;
    (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
}

async fn create(app: &axum::Router, log: &str) -> String {
    let (s, v) = json_call(app, "POST", "/sessions", log.to_string()).await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    v["sid"].as_str().unwrap().to_string()
}

fn seq_body() -> String {
    json!({"kind": "seq", "otype": "workflow:bank", "transitions": ["t5", "t6", "t7", "t8"]}).to_string()
}

fn labels(model: &Value) -> Vec<String> {
    model["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|n| n["label"].as_str().map(String::from))
        .collect()
}

#[tokio::test]
async fn upload_creates_an_initialized_session() {
    let (_, app) = app();
    let (s, v) = json_call(&app, "POST", "/sessions", fixtures::BANK).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v["threshold"], 30);
    assert_eq!(v["history"].as_array().unwrap().len(), 1);
    assert_eq!(v["model"]["metrics"]["elements"], 25);
}

#[tokio::test]
async fn malformed_upload_is_a_bad_request() {
    let (_, app) = app();
    let (s, v) = json_call(&app, "POST", "/sessions", "{\"events\": [").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert!(v["error"].as_str().unwrap().contains("line"));
}

#[tokio::test]
async fn foreign_abstraction_event_is_unprocessable() {
    let (_, app) = app();
    let mut doc: Value = serde_json::from_str(fixtures::BANK_AUGMENTED).unwrap();
    doc["events"].as_array_mut().unwrap().push(json!({
        "id": "zz999",
        "activity": "close account",
        "timestamp": "2023-05-19T11:05:00Z",
        "relations": {"workflow:bank": ["151a3"], "abstraction:workflow:client$caa": ["uih13"]}
    }));
    let (s, v) = json_call(&app, "POST", "/sessions", doc.to_string()).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "{v}");
}

#[tokio::test]
async fn apply_and_redo_round_trip() {
    let (_, app) = app();
    let sid = create(&app, fixtures::BANK).await;
    let (_, before) = json_call(&app, "GET", &format!("/sessions/{sid}/model"), Body::empty()).await;

    let (s, v) = json_call(&app, "POST", &format!("/sessions/{sid}/apply"), seq_body()).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert!(labels(&v["model"]).contains(&"→(?click open account, ..., ?retrieve acceptance signature)".to_string()));
    assert!(v["model"]["metrics"]["elements"].as_u64() < before["metrics"]["elements"].as_u64());
    assert_eq!(v["history"].as_array().unwrap().len(), 2);

    let (s, _) = json_call(&app, "POST", &format!("/sessions/{sid}/apply"), seq_body()).await;
    assert_eq!(s, StatusCode::CONFLICT);

    let oid = v["oid"].as_str().unwrap();
    let (s, v) = json_call(&app, "POST", &format!("/sessions/{sid}/redo"), json!({"oid": oid}).to_string()).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["model"], before);

    let (s, _) = json_call(&app, "POST", &format!("/sessions/{sid}/redo"), json!({"oid": oid}).to_string()).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn unknown_session_and_bad_bodies() {
    let (_, app) = app();
    let (s, _) = call(&app, "GET", "/sessions/nope/model", Body::empty()).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let sid = create(&app, fixtures::BANK).await;
    let (s, _) = call(&app, "POST", &format!("/sessions/{sid}/apply"), "[]").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(&app, "POST", &format!("/sessions/{sid}/redo"), json!({"oid": "ghost"}).to_string()).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn gets_are_repeatable() {
    let (_, app) = app();
    let sid = create(&app, fixtures::BANK).await;
    for path in ["model", "abstractions", "export"] {
        let a = call(&app, "GET", &format!("/sessions/{sid}/{path}"), Body::empty()).await;
        let b = call(&app, "GET", &format!("/sessions/{sid}/{path}"), Body::empty()).await;
        assert_eq!(a.0, StatusCode::OK);
        assert_eq!(a, b, "{path}");
    }
}

#[tokio::test]
async fn export_reimports_to_the_same_model() {
    let (_, app) = app();
    let sid = create(&app, fixtures::BANK).await;
    json_call(&app, "POST", &format!("/sessions/{sid}/apply"), seq_body()).await;
    let (_, model) = json_call(&app, "GET", &format!("/sessions/{sid}/model"), Body::empty()).await;
    let (_, exported) = call(&app, "GET", &format!("/sessions/{sid}/export"), Body::empty()).await;
    let (s, v) = json_call(&app, "POST", "/sessions", exported).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v["model"], model);
}

#[tokio::test]
async fn static_files_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<p>hi</p>").unwrap();
    let state = AppState::new(ServiceConfig {
        static_dir: Some(dir.path().to_path_buf()),
        ..ServiceConfig::default()
    });
    let app = router(state.clone());
    let (s, b) = call(&app, "GET", "/index.html", Body::empty()).await;
    assert_eq!((s, b), (StatusCode::OK, b"<p>hi</p>".to_vec()));
    let sid = create(&app, fixtures::BANK).await;
    let snaps = dir.path().join("snapshots");
    assert_eq!(state.snapshot(&snaps).unwrap(), 1);
    let (_, exported) = call(&app, "GET", &format!("/sessions/{sid}/export"), Body::empty()).await;
    assert_eq!(std::fs::read(snaps.join(format!("{sid}.json"))).unwrap(), exported);
}
