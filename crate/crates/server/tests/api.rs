use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use http_body_util::BodyExt;
use qualinet::analysis::{run_scenario, Scenario};
use qualinet::{compile, parse_model, resolve_goal, Network};
use serde_json::Value;
use tower::ServiceExt;

fn cm1() -> Network {
    let model = parse_model(include_str!("../../core/models/cm1.qm")).unwrap();
    compile(&model, resolve_goal(&model, None).unwrap()).unwrap()
}

const MEASURED: &str = include_str!("../../core/models/measured.json");

async fn call(method: &str, uri: &str, body: &str) -> (StatusCode, String) {
    let app = qualinet_server::router(cm1(), None);
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body.to_owned()))
        .unwrap();
    let response = app.oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

#[tokio::test]
async fn network_document() {
    let (status, body) = call("GET", "/api/network", "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, cm1().to_json());
}

#[tokio::test]
async fn empty_inference_matches_library() {
    let net = cm1();
    let report = run_scenario(&net, &Scenario::new("baseline")).unwrap();
    for body in ["{}", "", "{\"evidence\": {}}"] {
        let (status, text) = call("POST", "/api/infer", body).await;
        assert_eq!(status, StatusCode::OK);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["evidenceProbability"], 1.0);
        let effort = &v["moments"]["ChangeEffort"];
        assert_eq!(effort["mean"].as_f64().unwrap(), report.moments["ChangeEffort"].mean);
        assert_eq!(effort["sd"].as_f64().unwrap(), report.moments["ChangeEffort"].sd);
    }
}

#[tokio::test]
async fn measured_inference_matches_library_bit_for_bit() {
    let net = cm1();
    let scenario: Scenario = serde_json::from_str(MEASURED).unwrap();
    let report = run_scenario(&net, &scenario).unwrap();
    // The scenario file itself is a valid request body.
    let (status, text) = call("POST", "/api/infer", MEASURED).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_str(&text).unwrap();
    for (id, dist) in report.posteriors.iter() {
        let got: Vec<f64> = v["posteriors"][id]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        assert_eq!(got.as_slice(), dist, "{id}");
    }
    assert_eq!(
        v["moments"]["ChangeEffort"]["mean"].as_f64().unwrap(),
        report.moments["ChangeEffort"].mean
    );
    assert_eq!(text, qualinet_server::infer_json(&net, &scenario.evidence).unwrap());
}

#[tokio::test]
async fn error_statuses() {
    let (status, body) = call("POST", "/api/infer", r#"{"evidence":{"Nope":1}}"#).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(body.contains("Nope"));

    let (status, _) = call("POST", "/api/infer", r#"{"evidence": [1, 2"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call("POST", "/api/infer", r#"{"evidence":{"Maintenance": 0.5}}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call("POST", "/api/infer", r#"{"evidence":{"Maintenance": "great"}}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call("POST", "/api/infer", r#"{"evidence":{}, "extra": 1}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, body) = call(
        "POST",
        "/api/mpe",
        r#"{"evidence":{"AvgModuleSize":"[0, 20)"}, "restrictTo": ["Ghost"]}"#,
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(body.contains("Ghost"));

    let (status, _) = call("GET", "/api/sensitivity?target=Nope", "").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call("GET", "/api/sensitivity", "").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn impossible_evidence_is_a_conflict() {
    let net = Network::from_json(
        r#"{"name": "z", "nodes": [
            {"id": "A", "kind": "fact", "states": ["low", "high"], "parents": [], "cpt": [1.0, 0.0]},
            {"id": "I", "kind": "indicator", "states": ["[0, 1)", "[1, 2]"], "bounds": [0, 1, 2],
             "parents": ["A"], "cpt": [1.0, 0.0, 0.0, 1.0]}
        ]}"#,
    )
    .unwrap();
    let app = qualinet_server::router(net, None);
    let request = Request::post("/api/infer")
        .body(Body::from(r#"{"evidence": {"I": 1.5}}"#))
        .unwrap();
    let response = app.oneshot(request).await.unwrap();
    assert_eq!(response.status(), StatusCode::CONFLICT);
}

#[tokio::test]
async fn most_probable_explanation() {
    let (status, body) = call(
        "POST",
        "/api/mpe",
        r#"{"evidence": {"ChangeEffort": "[3.9, 10)"},
            "restrictTo": ["AvgModuleSize", "AvgCyclomaticComplexity", "CommentRatio"]}"#,
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_str(&body).unwrap();
    let expected = qualinet::explain_target(
        &cm1(),
        "ChangeEffort",
        &qualinet::Observation::Label("[3.9, 10)".into()),
    )
    .unwrap();
    assert_eq!(v, serde_json::to_value(&expected).unwrap());
}

#[tokio::test]
async fn sensitivity_ranking() {
    let (status, body) = call("GET", "/api/sensitivity?target=ChangeEffort", "").await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_str(&body).unwrap();
    let swings = v.as_array().unwrap();
    assert_eq!(swings.len(), 3);
    assert!(swings.iter().all(|s| s["swing"].as_f64().unwrap() > 0.0));

    let (status, body) = call(
        "GET",
        "/api/sensitivity?target=Maintenance&state=high&candidates=CommentRatio",
        "",
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(serde_json::from_str::<Value>(&body).unwrap().as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn index_and_cors() {
    let app = qualinet_server::router(cm1(), None);
    let request = Request::get("/")
        .header(header::ORIGIN, "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let response = app.oneshot(request).await.unwrap();
    assert_eq!(response.status(), StatusCode::OK);
    assert_eq!(
        response.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN],
        "*"
    );
}

#[tokio::test]
async fn static_directory_is_served() {
    let dir = std::env::temp_dir().join(format!("qualinet-static-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("index.html"), "<p>studio</p>").unwrap();
    let app = qualinet_server::router(cm1(), Some(dir.clone()));
    let response = app
        .oneshot(Request::get("/").body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(response.status(), StatusCode::OK);
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    assert_eq!(&bytes[..], b"<p>studio</p>");
    std::fs::remove_dir_all(dir).unwrap();
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_identical_requests_agree() {
    let app = qualinet_server::router(cm1(), None);
    let mut handles = Vec::new();
    for _ in 0..16 {
        let app = app.clone();
        handles.push(tokio::spawn(async move {
            let request = Request::post("/api/infer").body(Body::from(MEASURED)).unwrap();
            let response = app.oneshot(request).await.unwrap();
            response.into_body().collect().await.unwrap().to_bytes()
        }));
    }
    let mut bodies = Vec::new();
    for h in handles {
        bodies.push(h.await.unwrap());
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}
