use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use pi_core::gen::{generate_olap_log, OlapGenConfig, OLAP_STATEMENTS};
use pi_core::log::{QueryEntry, QueryLog};
use pi_core::pilang::parse_pilang;
use pi_core::pipeline::{pipeline, InterfaceSpec, PipelineOpts};
use pi_service::{router, serve_on, ApplyResponse, Backend, SqliteBackend};
use serde_json::{json, Value};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tower::ServiceExt;

const SALES: &str = "date,sales,costs,cty\n2024-01-01,10,4,USA\n2024-01-02,12,5,EUR\n2024-01-03,7,3,EUR\n2024-01-04,9,6,USA\n";

fn sales_spec() -> InterfaceSpec {
    let log = QueryLog {
        entries: vec![
            QueryEntry::parse("p1", "SELECT date, sales FROM sales WHERE cty = 'USA'").unwrap(),
            QueryEntry::parse("p2", "SELECT date, costs FROM sales WHERE cty = 'EUR'").unwrap(),
        ],
        rejected: vec![],
    };
    let s = parse_pilang("FROM Project//ColExpr AS C MATCH project-change(C)\n\nFROM Where//StrExpr AS S MATCH literal-change(S)").unwrap();
    let mut opts = PipelineOpts::default();
    opts.mine.compose = true;
    pipeline(&log, &s, &opts).unwrap().1
}

fn sales_app() -> (InterfaceSpec, Router) {
    let spec = sales_spec();
    let db: Arc<dyn Backend> = Arc::new(SqliteBackend::from_csv_str(SALES, "sales").unwrap());
    (spec.clone(), router(spec, db, None))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map_or(Body::empty(), |b| Body::from(b.to_string()))).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn widget_at(spec: &InterfaceSpec, path: &str) -> String {
    spec.interfaces[0].widgets.iter().find(|w| w.path == path).unwrap().id.clone()
}

#[tokio::test]
async fn health_and_spec() {
    let (spec, app) = sales_app();
    assert_eq!(call(&app, "GET", "/api/health", None).await, (StatusCode::OK, json!({"status": "ok"})));
    let (status, body) = call(&app, "GET", "/api/interfaces", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(serde_json::from_value::<InterfaceSpec>(body).unwrap(), spec);
}

#[tokio::test]
async fn apply_runs_the_rewritten_query() {
    let (spec, app) = sales_app();
    let state = json!({ widget_at(&spec, "0/1/0"): ["costs"], widget_at(&spec, "2/0/0/1"): ["EUR"] });
    let (status, body) = call(&app, "POST", "/api/interfaces/i0/apply", Some(json!({ "state": state }))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let r: ApplyResponse = serde_json::from_value(body).unwrap();
    assert_eq!(r.sql, "SELECT date, costs FROM sales WHERE cty = 'EUR'");
    assert_eq!(r.columns, vec!["date", "costs"]);
    // the rows the fixture holds for EUR, read straight from the CSV
    let expected: Vec<Vec<Value>> = SALES
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .filter(|c| c[3] == "EUR")
        .map(|c| vec![json!(c[0]), json!(c[2].parse::<i64>().unwrap())])
        .collect();
    assert_eq!(r.rows, expected);

    let (status, body) = call(&app, "POST", "/api/interfaces/i0/apply", Some(json!({}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["sql"], "SELECT date, sales FROM sales WHERE cty = 'USA'");
    assert_eq!(body["rows"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn apply_errors_map_to_statuses() {
    let (spec, app) = sales_app();
    let cty = widget_at(&spec, "2/0/0/1");
    let (status, body) = call(&app, "POST", "/api/interfaces/i0/apply", Some(json!({ "state": { &cty: ["JPY"] } }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "DomainViolation");
    assert_eq!(body["widget"], cty.as_str());

    let (status, body) = call(&app, "POST", "/api/interfaces/i9/apply", Some(json!({ "state": {} }))).await;
    assert_eq!((status, body["error"].as_str()), (StatusCode::NOT_FOUND, Some("UnknownInterface")));
    let (status, body) = call(&app, "POST", "/api/interfaces/i0/apply", Some(json!({ "state": { "w99": ["x"] } }))).await;
    assert_eq!((status, body["error"].as_str()), (StatusCode::NOT_FOUND, Some("UnknownWidget")));

    let (status, body) = call(&app, "POST", "/api/interfaces/i0/apply", Some(json!({ "state": {}, "base": "SELECT date FROM sales" }))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let (status, body) = call(&app, "POST", "/api/interfaces/i0/apply", Some(json!({ "state": { &cty: ["EUR"] }, "base": "SELECT date FROM sales" }))).await;
    assert_eq!((status, body["error"].as_str()), (StatusCode::UNPROCESSABLE_ENTITY, Some("PathNotFound")));

    let (status, body) = call(&app, "POST", "/api/interfaces/i0/apply", Some(json!({ "state": 5 }))).await;
    assert_eq!((status, body["error"].as_str()), (StatusCode::BAD_REQUEST, Some("BadRequest")));
}

#[tokio::test]
async fn backend_failures_are_sanitized() {
    let db: Arc<dyn Backend> = Arc::new(SqliteBackend::from_csv_str("x\n1\n", "other").unwrap());
    let app = router(sales_spec(), db, None);
    let (status, body) = call(&app, "POST", "/api/interfaces/i0/apply", Some(json!({ "state": {} }))).await;
    assert_eq!(status, StatusCode::INTERNAL_SERVER_ERROR);
    assert_eq!(body, json!({ "error": "BackendError", "message": "query execution failed" }));
}

#[tokio::test]
async fn every_olap_query_executes_on_the_fixture() {
    let log = QueryLog { entries: generate_olap_log(&OlapGenConfig { steps: 60, ..Default::default() }).unwrap(), rejected: vec![] };
    let spec = pipeline(&log, &parse_pilang(OLAP_STATEMENTS).unwrap(), &PipelineOpts::default()).unwrap().1;
    let fixture = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("resources/ontime.csv");
    let db: Arc<dyn Backend> = Arc::new(SqliteBackend::from_csv(&fixture, "ontime").unwrap());
    let app = router(spec.clone(), db, None);
    for e in &log.entries {
        let (status, body) = call(&app, "POST", "/api/interfaces/i0/apply", Some(json!({ "state": {}, "base": e.source }))).await;
        assert_eq!(status, StatusCode::OK, "{}: {body}", e.source);
        assert!(!body["columns"].as_array().unwrap().is_empty());
    }
    // and every single widget value from the initial query
    for w in &spec.interfaces[0].widgets {
        for v in &w.domain {
            let value = match w.kind {
                pi_core::mining::LabelKind::Collection => json!([v]),
                _ => json!(v),
            };
            let (status, body) = call(&app, "POST", "/api/interfaces/i0/apply", Some(json!({ "state": { &w.id: value } }))).await;
            assert!(status == StatusCode::OK || body["error"] == "PathNotFound", "{} {v:?}: {body}", w.id);
        }
    }
}

#[tokio::test]
async fn serves_over_tcp_with_assets() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>ui</html>").unwrap();
    let db: Arc<dyn Backend> = Arc::new(SqliteBackend::from_csv_str(SALES, "sales").unwrap());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve_on(listener, router(sales_spec(), db, Some(dir.path().into()))));
    let get = |path: &'static str| async move {
        let mut s = tokio::net::TcpStream::connect(addr).await.unwrap();
        s.write_all(format!("GET {path} HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n").as_bytes()).await.unwrap();
        let mut out = String::new();
        s.read_to_string(&mut out).await.unwrap();
        out
    };
    let health = get("/api/health").await;
    assert!(health.starts_with("HTTP/1.1 200") && health.ends_with(r#"{"status":"ok"}"#), "{health}");
    assert!(get("/").await.contains("<html>ui</html>"));
}
