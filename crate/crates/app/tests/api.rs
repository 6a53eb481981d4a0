use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use variant_app::service::{router, AppState, ImportResponse, InstanceDetail};
use variant_app::ResultDocument;
use variety_core::distance::HashedBagOfWords;

const CW: &str = include_str!("../../../fixtures/cw.csv");

fn app() -> (Router, Arc<AppState>, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let state = Arc::new(AppState::open(dir.path()).unwrap());
    (router(state.clone()), state, dir)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json");
    let request = match body {
        Some(b) => request.body(Body::from(b.to_string())).unwrap(),
        None => request.body(Body::empty()).unwrap(),
    };
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

async fn import_cw(app: &Router) {
    let (status, body) = call(app, "POST", "/spaces", Some(json!({ "space_id": "cw", "csv": CW }))).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
}

/// Serves `{"vectors"}` using the hashed encoder and counts requests.
async fn mock_embedding_server() -> (String, Arc<AtomicUsize>) {
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    let app = Router::new().route(
        "/embed",
        post(move |Json(req): Json<Value>| {
            let counter = counter.clone();
            async move {
                counter.fetch_add(1, Ordering::SeqCst);
                assert_eq!(req["model"], "mock-model");
                let encoder = HashedBagOfWords::default();
                let vectors: Vec<Vec<f64>> = req["input"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .map(|t| encoder.encode(t.as_str().unwrap()))
                    .collect();
                Json(json!({ "vectors": vectors }))
            }
        }),
    );
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    (format!("http://{addr}/embed"), hits)
}

#[tokio::test]
async fn healthz() {
    let (app, _, _dir) = app();
    let (status, body) = call(&app, "GET", "/healthz", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
}

#[tokio::test]
async fn import_then_read_back() {
    let (app, _, _dir) = app();
    let (status, body) = call(&app, "POST", "/spaces", Some(json!({ "space_id": "cw", "csv": CW, "problem": "boil water" }))).await;
    assert_eq!(status, StatusCode::CREATED);
    let resp: ImportResponse = serde_json::from_value(body).unwrap();
    assert_eq!((resp.space_id.as_str(), resp.concepts, resp.instances), ("cw", 4, 4));

    let (status, space) = call(&app, "GET", "/spaces/cw", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(space["concepts"].as_array().unwrap().len(), 4);
    assert_eq!(space["problem"], "boil water");

    let (status, detail) = call(&app, "GET", "/spaces/cw/concepts/4/instances/1", None).await;
    assert_eq!(status, StatusCode::OK);
    let detail: InstanceDetail = serde_json::from_value(detail).unwrap();
    assert_eq!(detail.concept_name, "Friction Heater");
    assert_eq!(detail.constructs.len(), 7);

    let (status, _) = call(&app, "GET", "/spaces/cw/concepts/4/instances/9", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn generated_ids_and_concept_lists() {
    let (app, _, _dir) = app();
    let constructs = |part: &str| {
        json!({ "part": part, "organ": "", "effect": "", "phenomenon": "", "input": "", "state_change": "", "action": "boil" })
    };
    let concepts = json!([
        { "concept_id": 1, "name": "a", "instances": [{ "instance_id": 1, "constructs": constructs("pot") }] },
        { "concept_id": 2, "name": "b", "instances": [{ "instance_id": 1, "constructs": constructs("coil") }] }
    ]);
    let (status, body) = call(&app, "POST", "/spaces", Some(json!({ "concepts": concepts }))).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    let id = body["space_id"].as_str().unwrap().to_string();
    assert_eq!(id.len(), 32);
    assert_eq!(body["validation"]["issues"].as_array().unwrap().len(), 10);
    let (status, list) = call(&app, "GET", "/spaces", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(list, json!([id]));
}

#[tokio::test]
async fn assessment_is_well_formed() {
    let (app, _, _dir) = app();
    import_cw(&app).await;
    let (status, body) = call(&app, "POST", "/spaces/cw/assess", Some(json!({ "provider": { "kind": "hash" }, "weights": "paper-default" }))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let doc: ResultDocument = serde_json::from_value(body.clone()).unwrap();
    assert!((0.0..=1.0).contains(&doc.overall));
    assert!(doc.per_level.values().chain(doc.per_concept.iter().map(|c| &c.score)).all(|v| (0.0..=1.0).contains(v)));
    let d = &doc.weighted_matrix;
    for i in 0..d.n() {
        assert_eq!(d.get(i, i), 0.0);
        for j in 0..d.n() {
            assert_eq!(d.get(i, j), d.get(j, i));
        }
    }
    // the submitted configuration is echoed
    assert_eq!(body["config"]["weights"], "paper-default");
    assert_eq!(body["config"]["provider"]["kind"], "hash");
    assert!(body["clusters"].is_null());
}

#[tokio::test]
async fn cluster_and_dendrogram() {
    let (app, _, _dir) = app();
    import_cw(&app).await;
    let (status, _) = call(&app, "POST", "/spaces/cw/cluster", Some(json!({ "k": 0 }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/spaces/cw/cluster", Some(json!({ "k": 5 }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, body) = call(&app, "POST", "/spaces/cw/cluster", Some(json!({ "k": 2 }))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["labels"], json!([0, 0, 0, 1]));
    let (status, body) = call(&app, "POST", "/spaces/cw/cluster", Some(json!({ "k": 2, "method": "mds-kmeans" }))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["medoids"], json!([]));
    let (status, tree) = call(&app, "GET", "/spaces/cw/dendrogram", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(tree["merges"].as_array().unwrap().len(), 3);
    assert_eq!(tree["leaves"], json!([1, 2, 3, 4]));
}

#[tokio::test]
async fn unknown_space_is_404() {
    let (app, _, _dir) = app();
    for (method, uri, body) in [
        ("GET", "/spaces/nope", None),
        ("POST", "/spaces/nope/assess", Some(json!({}))),
        ("POST", "/spaces/nope/cluster", Some(json!({ "k": 2 }))),
        ("GET", "/spaces/nope/dendrogram", None),
    ] {
        let (status, body) = call(&app, method, uri, body).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
        assert!(body["error"].as_str().unwrap().contains("nope"));
    }
}

#[tokio::test]
async fn schema_problems_are_400() {
    let (app, _, _dir) = app();
    let swapped = CW.replacen("part,organ", "organ,part", 1);
    let cases = [
        json!({ "csv": swapped }),
        json!({ "csv": "" }),
        json!({ "space_id": "../etc", "csv": CW }),
        json!({ "csv": CW, "concepts": [] }),
        json!({ "concepts": [] }),
        json!({ "csv": CW, "colour": "red" }),
        json!({ "csv": format!("{CW}1,Electric Kettle,1,a,b,c,d,e,f,g\n") }),
    ];
    for body in cases {
        let (status, resp) = call(&app, "POST", "/spaces", Some(body.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body} -> {resp}");
    }
    import_cw(&app).await;
    let (status, _) = call(&app, "POST", "/spaces/cw/assess", Some(json!({ "weights": [1, 2] }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/spaces/cw/assess", Some(json!({ "provider": { "kind": "telepathy" } }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/spaces/cw/assess", Some(json!({ "k": 0 }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/spaces/cw/cluster", Some(json!({ "k": "two" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn concurrent_reimport_is_409() {
    let (app, state, _dir) = app();
    let guard = state.begin_import("cw").unwrap();
    let (status, _) = call(&app, "POST", "/spaces", Some(json!({ "space_id": "cw", "csv": CW }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    drop(guard);
    import_cw(&app).await;
    // sequential re-import replaces the space
    import_cw(&app).await;
}

#[tokio::test(flavor = "multi_thread")]
async fn unreachable_provider_is_502() {
    let (app, _, _dir) = app();
    import_cw(&app).await;
    let config = json!({ "provider": { "kind": "service", "endpoint": "http://127.0.0.1:9/embed", "model": "m", "timeout_secs": 2 } });
    let (status, body) = call(&app, "POST", "/spaces/cw/assess", Some(config)).await;
    assert_eq!(status, StatusCode::BAD_GATEWAY);
    assert!(body["error"].as_str().unwrap().contains("127.0.0.1:9"), "{body}");
}

#[tokio::test(flavor = "multi_thread")]
async fn service_provider_round_trip() {
    let (endpoint, hits) = mock_embedding_server().await;
    let (app, _, _dir) = app();
    import_cw(&app).await;
    let config = json!({ "provider": { "kind": "service", "endpoint": endpoint, "model": "mock-model", "token": "t0ken", "batch_size": 2 } });
    let (status, body) = call(&app, "POST", "/spaces/cw/assess", Some(config)).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert!(!body.to_string().contains("t0ken"));
    let remote: ResultDocument = serde_json::from_value(body).unwrap();
    assert_eq!(remote.provider_id, "service:mock-model");
    // 7 levels x 4 texts in batches of 2
    assert_eq!(hits.load(Ordering::SeqCst), 14);

    let (_, body) = call(&app, "POST", "/spaces/cw/assess", Some(json!({}))).await;
    let local: ResultDocument = serde_json::from_value(body).unwrap();
    assert_eq!(remote.per_level, local.per_level);
    assert_eq!(remote.weighted_matrix, local.weighted_matrix);
}

#[tokio::test(flavor = "multi_thread")]
async fn malformed_provider_response_is_502() {
    let app_mock = Router::new().route("/embed", post(|| async { Json(json!({ "vectors": [[1.0]] })) }));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app_mock).await.unwrap() });

    let (app, _, _dir) = app();
    import_cw(&app).await;
    let config = json!({ "provider": { "kind": "service", "endpoint": format!("http://{addr}/embed"), "model": "m" } });
    let (status, body) = call(&app, "POST", "/spaces/cw/assess", Some(config)).await;
    assert_eq!(status, StatusCode::BAD_GATEWAY);
    assert!(body["error"].as_str().unwrap().contains("vectors"), "{body}");
}

#[tokio::test]
async fn spaces_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    {
        let app = router(Arc::new(AppState::open(dir.path()).unwrap()));
        import_cw(&app).await;
    }
    assert!(dir.path().join("cw.json").exists());
    let app = router(Arc::new(AppState::open(dir.path()).unwrap()));
    let (status, space) = call(&app, "GET", "/spaces/cw", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(space["space_id"], "cw");
}
