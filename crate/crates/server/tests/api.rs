// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use paramap::corpus::{ingest_files, CorpusStore, TimeWindow, Validation};
use paramap::pipeline::{run_macro, run_meso, FieldSet, MacroConfig, MesoConfig};
use paramap_server::{build_app, router, AppState, ServerConfig, CACHE_HEADER};
use serde_json::Value;
use tower::ServiceExt;

fn fixture() -> CorpusStore {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    ingest_files(&dir.join("occurrences.csv"), &dir.join("cooccurrences.csv"), Validation::Strict)
        .unwrap()
        .0
}

fn app() -> Router {
    router(Arc::new(AppState::new(fixture(), 64, Duration::from_secs(10))))
}

struct Reply {
    status: StatusCode,
    cache: Option<String>,
    retry_after: Option<String>,
    body: String,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_str(&self.body).unwrap()
    }
}

async fn get(app: &Router, uri: &str) -> Reply {
    let resp = app
        .clone()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    let header = |name: &str| resp.headers().get(name).map(|v| v.to_str().unwrap().to_string());
    let cache = header(CACHE_HEADER);
    let retry_after = header("retry-after");
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        cache,
        retry_after,
        body: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

#[tokio::test]
async fn terms_by_prefix() {
    let app = app();
    let all = get(&app, "/terms?prefix=").await.json();
    let all = all.as_array().unwrap();
    assert_eq!(all.len(), 30);
    let totals: Vec<u64> = all.iter().map(|e| e["total_occurrences"].as_u64().unwrap()).collect();
    assert!(totals.windows(2).all(|w| w[0] >= w[1]));

    let kno = get(&app, "/terms?prefix=kno").await.json();
    assert_eq!(kno.as_array().unwrap().len(), 1);
    assert_eq!(kno[0]["label"], "knowledge discovery");
    assert_eq!(get(&app, "/terms?prefix=zzz").await.body, "[]");
}

fn neighbor_value(payload: &Value, label: &str) -> Option<f64> {
    payload["neighbors"]
        .as_array()
        .unwrap()
        .iter()
        .find(|n| n["label"] == label)
        .map(|n| n["value"].as_f64().unwrap())
}

#[tokio::test]
async fn neighbors_payloads() {
    let app = app();
    let a = get(&app, "/neighbors?term=neural%20network&alpha=1&s=0&y1=2002&y2=2005").await.json();
    let b = get(&app, "/neighbors?term=machine%20learning&alpha=1&s=0&y1=2002&y2=2005").await.json();
    assert_eq!(
        neighbor_value(&a, "machine learning").unwrap(),
        neighbor_value(&b, "neural network").unwrap()
    );
    assert_eq!(a["dual_alpha"], 1.0);
    assert_eq!(a["window"], serde_json::json!([2002, 2005]));

    let empty = get(&app, "/neighbors?term=neural%20network&alpha=1&s=1").await.json();
    assert!(empty["neighbors"].as_array().unwrap().is_empty());

    let hub = get(&app, "/neighbors?term=complex%20systems&alpha=10&s=0.1&y1=2002&y2=2005").await.json();
    assert_eq!(hub["dual_alpha"], 0.1);
    for s in ["agent-based models", "cellular automata", "emergence", "scale-free networks", "self-organization"] {
        assert!(neighbor_value(&hub, s).is_some(), "{s}");
        let back = get(&app, &format!("/neighbors?term={}&alpha=0.1&s=0.1&y1=2002&y2=2005", s.replace(' ', "%20")))
            .await
            .json();
        let there = neighbor_value(&hub, s).unwrap();
        let here = neighbor_value(&back, "complex systems").unwrap();
        assert!((there - here).abs() <= 1e-12 * there);
    }
    let values: Vec<f64> = hub["neighbors"].as_array().unwrap().iter().map(|n| n["value"].as_f64().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] >= w[1]));
}

#[tokio::test]
async fn neighbor_errors() {
    let app = app();
    assert_eq!(get(&app, "/neighbors?term=quantum%20gravity").await.status, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/neighbors?term=emergence&alpha=0").await.status, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/neighbors?term=emergence&alpha=abc").await.status, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/neighbors?term=emergence&s=1.5").await.status, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/neighbors?term=emergence&y1=2005&y2=2002").await.status, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/neighbors?term=emergence&y1=1990&y2=2002").await.status, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/neighbors").await.status, StatusCode::BAD_REQUEST);
    let err = get(&app, "/neighbors?term=emergence&alpha=1&y1=1996&y2=1996").await;
    assert_eq!(err.status, StatusCode::OK);
}

#[tokio::test]
async fn fields_are_cached_and_deterministic() {
    let app = app();
    let uri = "/fields?alpha=1&s=0.1&k=3&y1=2002&y2=2005";
    let first = get(&app, uri).await;
    assert_eq!(first.status, StatusCode::OK);
    assert_eq!(first.cache.as_deref(), Some("miss"));
    let second = get(&app, uri).await;
    assert_eq!(second.cache.as_deref(), Some("hit"));
    assert_eq!(first.body, second.body);

    let set = first.json();
    let holding = set["fields"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|f| f["members"].as_array().unwrap().iter().any(|m| m["label"] == "knowledge discovery"))
        .count();
    assert_eq!(holding, 2);

    // same body as a direct computation
    let store = fixture();
    let cfg = MesoConfig::new(TimeWindow::new(2002, 2005).unwrap(), 1.0, 0.1);
    let direct = FieldSet::new(cfg, &run_meso(&store, &cfg).unwrap().fields).to_json().unwrap();
    assert_eq!(first.body, direct);
}

#[tokio::test]
async fn field_errors() {
    let app = app();
    assert_eq!(get(&app, "/fields?y1=1990&y2=2002").await.status, StatusCode::BAD_REQUEST);
    // previous window of 1996:2005 does not fit
    assert_eq!(get(&app, "/fields").await.status, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/fields?k=2&y1=2002&y2=2005").await.status, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/fields?edge_rule=xor&y1=2002&y2=2005").await.status, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/map?min=9&max=3&y1=2002&y2=2005").await.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn budget_overrun_is_503() {
    let state = AppState::new(fixture(), 64, Duration::from_secs(10)).with_clique_budget(2);
    let app = router(Arc::new(state));
    let r = get(&app, "/fields?alpha=1&s=0.1&y1=2002&y2=2005").await;
    assert_eq!(r.status, StatusCode::SERVICE_UNAVAILABLE);
    assert!(r.json()["error"].as_str().unwrap().contains("budget of 2"));
}

#[tokio::test]
async fn map_matches_direct_computation() {
    let app = app();
    let r = get(&app, "/map?alpha=1&s=0.1&y1=2002&y2=2005&min=6&max=20").await;
    assert_eq!(r.status, StatusCode::OK);
    let store = fixture();
    let cfg = MesoConfig::new(TimeWindow::new(2002, 2005).unwrap(), 1.0, 0.1);
    let fields = run_meso(&store, &cfg).unwrap().fields;
    let direct = run_macro(&store, &cfg, &fields, &MacroConfig::default()).unwrap().to_json().unwrap();
    assert_eq!(r.body, direct);
    let map = r.json();
    assert_eq!(map["nodes"].as_array().unwrap().len(), 4);
    assert_eq!(map["edges"][0]["weight"], 1);
}

#[tokio::test]
async fn slow_requests_get_202_then_cached_result() {
    let app = router(Arc::new(AppState::new(fixture(), 64, Duration::ZERO)));
    let uri = "/fields?alpha=1&s=0.1&y1=2002&y2=2005";
    let first = get(&app, uri).await;
    if first.status == StatusCode::ACCEPTED {
        assert_eq!(first.retry_after.as_deref(), Some("1"));
        let mut reply = get(&app, uri).await;
        for _ in 0..200 {
            if reply.status == StatusCode::OK {
                break;
            }
            assert_eq!(reply.status, StatusCode::ACCEPTED);
            tokio::time::sleep(Duration::from_millis(25)).await;
            reply = get(&app, uri).await;
        }
        assert_eq!(reply.status, StatusCode::OK);
        assert_eq!(reply.cache.as_deref(), Some("hit"));
    } else {
        assert_eq!(first.status, StatusCode::OK);
    }
}

#[tokio::test]
async fn healthz_reports_fingerprint() {
    let store = fixture();
    let fp = store.fingerprint();
    let app = router(Arc::new(AppState::new(store, 4, Duration::from_secs(1))));
    let h = get(&app, "/healthz").await.json();
    assert_eq!(h["fingerprint"], fp);
    assert_eq!(h["status"], "ok");
}

#[tokio::test]
async fn configured_app_preloads_and_sends_cors() {
    let dir = tempfile::tempdir().unwrap();
    let store = fixture();
    let store_path = dir.path().join("store.json");
    std::fs::write(&store_path, store.to_json().unwrap()).unwrap();
    let cfg = MesoConfig::new(TimeWindow::new(2002, 2005).unwrap(), 1.0, 0.1);
    let fields = run_meso(&store, &cfg).unwrap().fields;
    let fields_path = dir.path().join("fields.json");
    std::fs::write(&fields_path, FieldSet::new(cfg, &fields).to_json().unwrap()).unwrap();
    let map_path = dir.path().join("map.json");
    let map = run_macro(&store, &cfg, &fields, &MacroConfig::default()).unwrap();
    std::fs::write(&map_path, map.to_json().unwrap()).unwrap();

    let mut config = ServerConfig::new("127.0.0.1:0".parse().unwrap(), store_path);
    config.fields_path = Some(fields_path);
    config.map_path = Some(map_path);
    config.cors_allowlist = vec!["http://localhost:5173".into()];
    let app = build_app(&config).unwrap();

    let f = get(&app, "/fields?alpha=1&s=0.1&y1=2002&y2=2005").await;
    assert_eq!(f.cache.as_deref(), Some("hit"));
    let m = get(&app, "/map?alpha=1&s=0.1&y1=2002&y2=2005").await;
    assert_eq!(m.cache.as_deref(), Some("hit"));
    assert_eq!(m.body, map.to_json().unwrap());

    let resp = app
        .clone()
        .oneshot(
            Request::get("/healthz")
                .header("origin", "http://localhost:5173")
                .body(Body::empty())
                .unwrap(),
        )
        .await
        .unwrap();
    assert_eq!(
        resp.headers().get("access-control-allow-origin").unwrap(),
        "http://localhost:5173"
    );
    let resp = app
        .oneshot(
            Request::get("/healthz")
                .header("origin", "http://evil.example")
                .body(Body::empty())
                .unwrap(),
        )
        .await
        .unwrap();
    assert!(resp.headers().get("access-control-allow-origin").is_none());
}
