use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use ufbd_cli::commands::transcript_config;
use ufbd_cli::http::{router, AppState};
use ufbd_core::config::ConfigFile;
use ufbd_core::dialogue::{replay, Transcript};
use ufbd_core::fixtures;
use ufbd_core::graph::canonical_key;

fn fixture(rel: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

/// An inline copy of a fixture config, without its target unless asked.
fn payload(rel: &str, keep_target: bool) -> Value {
    let (file, base) = ConfigFile::load(&fixture(rel)).unwrap();
    let mut file = file.inline(&base).unwrap();
    if !keep_target {
        file.target = None;
    }
    serde_json::to_value(file).unwrap()
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() })
}

fn app(dir: &Path) -> Router {
    router(Arc::new(AppState::open(dir).unwrap()))
}

fn minimal(config: Value) -> Value {
    json!({ "config": config, "presenter": "minimal" })
}

fn keys(candidates: &Value) -> Vec<String> {
    candidates.as_array().unwrap().iter().map(|c| c["key"].as_str().unwrap().to_string()).collect()
}

async fn create(app: &Router, body: Value) -> (String, Value) {
    let (status, v) = call(app, "POST", "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    (v["id"].as_str().unwrap().to_string(), v)
}

fn pos(keys: &[String]) -> Value {
    Value::Array(keys.iter().map(|k| json!({ "propertyKey": k, "polarity": "pos" })).collect())
}

#[tokio::test]
async fn plant_flow_reaches_g0() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (id, created) = create(&app, minimal(payload("plant/pool.json", false))).await;
    let first = &created["presentation"];
    assert_eq!(first["turn"], 1);
    let mut shown = vec![canonical_key(&fixtures::plant_g1()), canonical_key(&fixtures::plant_g2())];
    shown.sort();
    assert_eq!(keys(&first["candidates"]), shown);
    let cand = &first["candidates"][0];
    assert!(cand["graph"]["vertices"].is_array());
    assert!(cand["properties"].as_array().unwrap().iter().all(|p| p["pointed"] == false));

    let fb = pos(&[canonical_key(&fixtures::plant_g1()), canonical_key(&fixtures::plant_g2())]);
    let (status, v) = call(&app, "POST", &format!("/sessions/{id}/feedback"), Some(json!({ "turn": 1, "items": fb }))).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["accepted"], true);
    assert_eq!(keys(&v["next"]["candidates"]), vec![canonical_key(&fixtures::plant_g0())]);

    let (_, t) = call(&app, "GET", &format!("/sessions/{id}/transcript"), None).await;
    let t: Transcript = serde_json::from_value(t).unwrap();
    assert_eq!(t.turns.len(), 3);
    let cfg = transcript_config(&t, Path::new("/")).unwrap();
    assert_eq!(replay(&cfg, &t.turns).unwrap().turns(&cfg), t.turns);

    let (_, s) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(s["status"], "awaiting");
    assert_eq!(s["positives"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn stale_and_repeated_turns_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (id, _) = create(&app, minimal(payload("plant/pool.json", false))).await;
    let body = json!({ "turn": 1, "items": pos(&[canonical_key(&fixtures::plant_g1())]) });
    let uri = format!("/sessions/{id}/feedback");
    let (status, v) = call(&app, "POST", &uri, Some(json!({ "turn": 0, "items": [] }))).await;
    assert_eq!((status, v["expectedTurn"].clone()), (StatusCode::CONFLICT, json!(1)));
    assert_eq!(call(&app, "POST", &uri, Some(body.clone())).await.0, StatusCode::OK);
    let (status, v) = call(&app, "POST", &uri, Some(body)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["expectedTurn"], 3);
}

#[tokio::test]
async fn violations_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (id, _) = create(&app, payload("plant/pool.json", false)).await;
    let (status, v) =
        call(&app, "POST", &format!("/sessions/{id}/feedback"), Some(json!({ "turn": 1, "items": [] }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["accepted"], false);
    assert_eq!(v["violations"][0]["condition"], "Basic 2(c)");

    let (id, created) = create(&app, payload("three-predicate/pool.json", false)).await;
    let cands = &created["presentation"]["candidates"];
    assert_eq!(cands.as_array().unwrap().len(), 2);
    let p = cands[0]["properties"][0]["key"].clone();
    let items = json!([{ "propertyKey": p, "polarity": "neutral" }]);
    let (status, v) = call(&app, "POST", &format!("/sessions/{id}/feedback"), Some(json!({ "turn": 1, "items": items }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let ids: Vec<&str> = v["violations"].as_array().unwrap().iter().map(|x| x["condition"].as_str().unwrap()).collect();
    assert!(ids.contains(&"Simple 2(a)"), "{ids:?}");

    let items = json!([{ "propertyKey": "nope", "polarity": "pos" }]);
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/feedback"), Some(json!({ "turn": 1, "items": items }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn empty_pool_ends_at_once() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let mut body = payload("plant/pool.json", false);
    body["items"] = json!([]);
    let (id, created) = create(&app, body).await;
    assert_eq!(created["terminal"]["status"], "maximal");
    let (_, t) = call(&app, "GET", &format!("/sessions/{id}/transcript"), None).await;
    assert_eq!(t["turns"].as_array().unwrap().len(), 1);
    let (status, _) =
        call(&app, "POST", &format!("/sessions/{id}/feedback"), Some(json!({ "turn": 1, "items": [] }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn coach_target_reports_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let mut body = payload("two-predicate/pool.json", false);
    body["target"] = json!([["p1(0) & !p2(0)"]]);
    let (id, _) = create(&app, body).await;
    let uri = format!("/sessions/{id}/feedback");
    // Follow the towards rule until the dialogue ends.
    for _ in 0..40 {
        let (_, pres) = call(&app, "GET", &format!("/sessions/{id}/presentation"), None).await;
        if pres.get("terminal").is_some() {
            assert_eq!(pres["terminal"]["convergence"]["verdict"], "converges", "{pres}");
            return;
        }
        let (_, s) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
        let target: Vec<String> = serde_json::from_value(s["target"].clone()).unwrap();
        let tprops: Vec<String> = {
            let (_, t) = call(&app, "GET", &format!("/sessions/{id}/transcript"), None).await;
            let t: Transcript = serde_json::from_value(t).unwrap();
            let cfg = transcript_config(&t, Path::new("/")).unwrap();
            let i = cfg.pool.item_index(&target[0]).unwrap();
            cfg.pool.props(i).iter().map(|&p| cfg.pool.properties()[p].key.clone()).collect()
        };
        let mut items = Vec::new();
        for c in pres["candidates"].as_array().unwrap() {
            for p in c["properties"].as_array().unwrap() {
                let k = p["key"].as_str().unwrap().to_string();
                if p["pointed"] == false && !items.iter().any(|x: &Value| x["propertyKey"] == k) {
                    let pol = if tprops.contains(&k) { "pos" } else { "neg" };
                    items.push(json!({ "propertyKey": k, "polarity": pol }));
                }
            }
        }
        let (status, v) = call(&app, "POST", &uri, Some(json!({ "turn": pres["turn"], "items": items }))).await;
        assert_eq!(status, StatusCode::OK, "{v}");
    }
    panic!("the dialogue did not end");
}

/// Positive feedback on the first unpointed property shown.
async fn first_fresh(app: &Router, id: &str) -> Value {
    let (_, pres) = call(app, "GET", &format!("/sessions/{id}/presentation"), None).await;
    let props = pres["candidates"][0]["properties"].as_array().unwrap();
    let p = props.iter().find(|p| p["pointed"] == false).unwrap();
    json!({ "turn": pres["turn"], "items": [{ "propertyKey": p["key"], "polarity": "pos" }] })
}

#[tokio::test]
async fn sessions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let (id, before, next) = {
        let app = app(dir.path());
        let (id, _) = create(&app, payload("plant/pool.json", false)).await;
        let fb = first_fresh(&app, &id).await;
        assert_eq!(call(&app, "POST", &format!("/sessions/{id}/feedback"), Some(fb)).await.0, StatusCode::OK);
        let (_, t) = call(&app, "GET", &format!("/sessions/{id}/transcript"), None).await;
        let next = first_fresh(&app, &id).await;
        (id, t, next)
    };
    let app = app(dir.path());
    let (_, after) = call(&app, "GET", &format!("/sessions/{id}/transcript"), None).await;
    assert_eq!(before, after);
    assert_eq!(first_fresh(&app, &id).await, next);
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/feedback"), Some(next)).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn bad_requests() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    assert_eq!(call(&app, "GET", "/sessions/missing", None).await.0, StatusCode::NOT_FOUND);
    let mut body = payload("plant/pool.json", false);
    body["protocol"] = json!("Basic");
    body["theory"] = json!(["Open(P)"]);
    let (status, v) = call(&app, "POST", "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{v}");
    assert!(v["error"].as_str().unwrap().contains("theory"));
}
