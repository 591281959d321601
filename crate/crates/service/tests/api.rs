use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tenun_core::io::{decode_pattern_json, document_png, encode_pattern_json, parse_wif, run_sweep, SweepParams};
use tenun_core::{evolve, EvolutionConfig, InitSpec, RuleSpec};
use tenun_service::{router, ServiceConfig};
use tower::ServiceExt;

fn app() -> Router {
    router(ServiceConfig::default()).unwrap()
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let headers = res.headers().clone();
    let bytes = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, headers, bytes)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn post_json(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    let req =
        Request::post(uri).header(header::CONTENT_TYPE, "application/json").body(Body::from(body.to_string())).unwrap();
    let (status, _, bytes) = send(app, req).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

async fn put_json(app: &Router, uri: &str, if_match: Option<&str>, body: Value) -> (StatusCode, Value) {
    let mut req = Request::put(uri).header(header::CONTENT_TYPE, "application/json");
    if let Some(rev) = if_match {
        req = req.header(header::IF_MATCH, rev);
    }
    let (status, _, bytes) = send(app, req.body(Body::from(body.to_string())).unwrap()).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn rule90_request() -> Value {
    json!({
        "rule": {"id": "90"},
        "config": {"width": 63, "steps": 31, "boundary": {"fixed": 0}, "init": {"kind": "single_center", "state": 1}}
    })
}

async fn create(app: &Router, body: Value) -> String {
    let (status, v) = post_json(app, "/api/patterns", body).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["session_id"].as_str().unwrap().to_string()
}

fn multipart(parts: &[(&str, &[u8])]) -> (String, Vec<u8>) {
    let boundary = "tenun-test-boundary";
    let mut body = Vec::new();
    for (name, data) in parts {
        body.extend_from_slice(format!("--{boundary}\r\n").as_bytes());
        body.extend_from_slice(
            format!("Content-Disposition: form-data; name=\"{name}\"; filename=\"{name}\"\r\n\r\n").as_bytes(),
        );
        body.extend_from_slice(data);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{boundary}--\r\n").as_bytes());
    (format!("multipart/form-data; boundary={boundary}"), body)
}

async fn post_raster(app: &Router, parts: &[(&str, &[u8])]) -> (StatusCode, Value) {
    let (content_type, body) = multipart(parts);
    let req = Request::post("/api/raster").header(header::CONTENT_TYPE, content_type).body(Body::from(body)).unwrap();
    let (status, _, bytes) = send(app, req).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn white_pgm(w: usize, h: usize) -> Vec<u8> {
    let mut bytes = format!("P5 {w} {h} 255\n").into_bytes();
    bytes.resize(bytes.len() + w * h, 255);
    bytes
}

#[tokio::test]
async fn create_returns_evolved_document() {
    let app = app();
    let (status, v) = post_json(&app, "/api/patterns", rule90_request()).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(v["revision"], 1);
    let doc = decode_pattern_json(v["document"].to_string().as_bytes()).unwrap();
    let config = EvolutionConfig {
        width: 63,
        steps: 31,
        boundary: tenun_core::Boundary::Fixed(0),
        init: InitSpec::SingleCenter { state: 1 },
    };
    let grid = evolve(&RuleSpec::from_wolfram(90).unwrap(), &config).unwrap();
    assert_eq!(doc.pattern_grid().unwrap().cells(), grid.cells());
    assert!(doc.metrics.is_some());
}

#[tokio::test]
async fn render_is_deterministic_and_matches_library() {
    let app = app();
    let id = create(&app, rule90_request()).await;
    let (status, headers, first) = get(&app, &format!("/api/patterns/{id}/render.png?cellpx=3")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(headers[header::CONTENT_TYPE], "image/png");
    let (_, _, second) = get(&app, &format!("/api/patterns/{id}/render.png?cellpx=3")).await;
    assert_eq!(first, second);
    let (_, _, doc) = get(&app, &format!("/api/patterns/{id}")).await;
    let v: Value = serde_json::from_slice(&doc).unwrap();
    let doc = decode_pattern_json(v["document"].to_string().as_bytes()).unwrap();
    assert_eq!(document_png(&doc, 3).unwrap(), first);
}

#[tokio::test]
async fn put_honours_revisions() {
    let app = app();
    let id = create(&app, rule90_request()).await;
    let uri = format!("/api/patterns/{id}");
    let colorway = json!({"colorway": {"palette": ["#000000", "#ffffff"], "warp_colors": [1], "weft_colors": [0]}});

    let (status, v) = put_json(&app, &uri, Some("\"1\""), colorway.clone()).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["revision"], 2);
    assert_eq!(v["document"]["colorway"]["palette"][0], "#000000");

    let (status, v) = put_json(&app, &uri, Some("1"), colorway).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["error"]["code"], "stale_revision");
    assert_eq!(v["error"]["current_revision"], 2);

    let config = json!({"config": {"width": 20, "steps": 5, "init": {"kind": "random", "seed": 3, "density": 0.5}}});
    let (status, v) = put_json(&app, &uri, None, config).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["revision"], 3);
    assert_eq!(v["document"]["grid"]["width"], 20);
    assert_eq!(v["document"]["colorway"]["palette"][1], "#ffffff");
    let (_, headers, _) = get(&app, &uri).await;
    assert_eq!(headers[header::ETAG], "\"3\"");
}

#[tokio::test]
async fn concurrent_puts_on_one_revision_serialize() {
    let app = app();
    let id = create(&app, rule90_request()).await;
    let uri = format!("/api/patterns/{id}");
    let tasks: Vec<_> = (0..16)
        .map(|i| {
            let app = app.clone();
            let uri = uri.clone();
            tokio::spawn(async move {
                let body = json!({"config": {"width": 10 + i, "steps": 4, "init": {"kind": "random", "seed": i, "density": 0.5}}});
                put_json(&app, &uri, Some("1"), body).await.0
            })
        })
        .collect();
    let mut ok = 0;
    for t in tasks {
        match t.await.unwrap() {
            StatusCode::OK => ok += 1,
            StatusCode::CONFLICT => {}
            other => panic!("{other}"),
        }
    }
    assert_eq!(ok, 1);
    let (_, _, bytes) = get(&app, &uri).await;
    assert_eq!(serde_json::from_slice::<Value>(&bytes).unwrap()["revision"], 2);
}

#[tokio::test]
async fn errors_carry_status_and_path() {
    let app = app();
    let (status, _, bytes) = get(&app, "/api/patterns/nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(serde_json::from_slice::<Value>(&bytes).unwrap()["error"]["code"], "not_found");

    let mut body = rule90_request();
    body["config"]["colour"] = json!("red");
    let (status, v) = post_json(&app, "/api/patterns", body).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["path"], "config.colour");

    let mut body = rule90_request();
    body["config"]["width"] = json!("wide");
    let (status, v) = post_json(&app, "/api/patterns", body).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["path"], "config.width");

    let (status, _, bytes) = get(&app, "/api/rules/elementary?width=abc").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(serde_json::from_slice::<Value>(&bytes).unwrap()["error"]["path"], "query");

    let (status, v) =
        post_json(&app, "/api/patterns", json!({"rule": {"id": "300"}, "config": rule90_request()["config"]})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{v}");
}

#[tokio::test]
async fn draft_wif_and_capacity_conflict() {
    let app = app();
    let id = create(&app, rule90_request()).await;
    let (status, _, wif) = get(&app, &format!("/api/patterns/{id}/draft.wif")).await;
    assert_eq!(status, StatusCode::OK);
    let draft = parse_wif(&wif).unwrap();
    let (_, _, doc) = get(&app, &format!("/api/patterns/{id}")).await;
    let v: Value = serde_json::from_slice(&doc).unwrap();
    let doc = decode_pattern_json(v["document"].to_string().as_bytes()).unwrap();
    assert_eq!(draft.reconstruct(), doc.pattern_grid().unwrap().cells());

    let wide = json!({"rule": {"id": "30"}, "config": {"width": 80, "steps": 60, "init": {"kind": "random", "seed": 9, "density": 0.5}}});
    let id = create(&app, wide).await;
    let (status, _, bytes) = get(&app, &format!("/api/patterns/{id}/draft.wif")).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["error"]["code"], "capacity");
    assert!(v["error"]["required_shafts"].as_u64().unwrap() > 32);
    let (status, _, _) = get(&app, &format!("/api/patterns/{id}/draft.wif?capacity=128")).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn metrics_endpoint_reports_reasons() {
    let app = app();
    let body = json!({"rule": {"id": "0"}, "config": {"width": 30, "steps": 10, "init": {"kind": "random", "seed": 1, "density": 0.5}}});
    let id = create(&app, body).await;
    let (status, _, bytes) = get(&app, &format!("/api/patterns/{id}/metrics")).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["rule"], "0");
    assert_eq!(v["h"], 0.0);
    assert_eq!(v["weaveable"], false);
    assert_eq!(v["reasons"], json!(["ratio", "weft-float"]));
}

#[tokio::test]
async fn sweep_matches_library() {
    let app = app();
    let (status, _, bytes) = get(&app, "/api/rules/elementary?width=41&steps=20&seed=5&hmax=3&maxfloat=4").await;
    assert_eq!(status, StatusCode::OK);
    let served: Value = serde_json::from_slice(&bytes).unwrap();
    let params = SweepParams { width: 41, steps: 20, seed: 5, h_max: 3.0, max_float: 4, ..SweepParams::default() };
    let local = serde_json::to_value(run_sweep(&params).unwrap()).unwrap();
    assert_eq!(served, local);
    assert_eq!(served["rows"].as_array().unwrap().len(), 256);
}

#[tokio::test]
async fn raster_upload_repairs_and_stores() {
    let app = app();
    let image = white_pgm(40, 40);
    let config = br#"{"target_width": 40, "target_height": 40, "method": {"kind": "error-diffusion"}}"#;
    let (status, v) = post_raster(&app, &[("image", &image), ("config", config)]).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    assert!(v["floats"]["max_weft_float"].as_u64().unwrap() <= 5);
    assert!(v["floats"]["max_warp_float"].as_u64().unwrap() <= 5);
    assert!(!v["flipped"].as_array().unwrap().is_empty());
    let doc = decode_pattern_json(v["document"].to_string().as_bytes()).unwrap();
    assert_eq!(encode_pattern_json(&doc).unwrap(), encode_pattern_json(&doc).unwrap());
    let (status, _, _) = get(&app, &format!("/api/patterns/{}", v["session_id"].as_str().unwrap())).await;
    assert_eq!(status, StatusCode::OK);

    let (status, v) = post_raster(&app, &[("image", &image), ("config", config), ("repair", b"false")]).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(v["verdict"]["weaveable"], false);
    assert!(v["verdict"]["reasons"].as_array().unwrap().contains(&json!("weft-float")));
}

#[tokio::test]
async fn raster_limits() {
    let app = app();
    let config = br#"{"target_width": 8, "target_height": 8, "method": {"kind": "otsu"}}"#;
    let huge = white_pgm(2100, 2100);
    let (status, _) = post_raster(&app, &[("image", &huge), ("config", config)]).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);

    let tall = b"P5 10 5000 255\n".to_vec();
    let (status, _) = post_raster(&app, &[("image", &tall), ("config", config)]).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);

    let bad = br#"{"target_width": 8, "target_height": 8, "method": {"kind": "fixed-threshold", "threshold": "x"}}"#;
    let (status, v) = post_raster(&app, &[("image", &white_pgm(4, 4)), ("config", bad)]).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["path"], "config.method");
}

#[tokio::test]
async fn snapshots_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let config = ServiceConfig { state_dir: Some(dir.path().to_path_buf()), ..ServiceConfig::default() };
    let first = router(config.clone()).unwrap();
    let id = create(&first, rule90_request()).await;
    let (_, _, before) = get(&first, &format!("/api/patterns/{id}")).await;
    let second = router(config).unwrap();
    let (status, _, after) = get(&second, &format!("/api/patterns/{id}")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(before, after);
}

#[tokio::test]
async fn cors_allows_configured_origin() {
    let app =
        router(ServiceConfig { cors_origin: Some("http://studio.local".into()), ..ServiceConfig::default() }).unwrap();
    let req = Request::get("/api/rules/elementary?width=11&steps=3")
        .header(header::ORIGIN, "http://studio.local")
        .body(Body::empty())
        .unwrap();
    let (status, headers, _) = send(&app, req).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(headers[header::ACCESS_CONTROL_ALLOW_ORIGIN], "http://studio.local");
}
