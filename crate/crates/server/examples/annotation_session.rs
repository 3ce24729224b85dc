//! Drives the service in-process: one annotation write, a stale retry and a
//! short judging session, printing each response.
//!
//! ```bash
//! cargo run -p qed-server --example annotation_session
//! ```

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use qed_core::corpus::CorpusDocument;
use qed_core::samples;
use qed_server::{router, AppState, SharedState};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn send(state: &SharedState, method: &str, uri: &str, body: Option<Value>) -> Value {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value: Value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    println!("{method} {uri} -> {status}\n  {value}");
    value
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let dir = tempfile::tempdir()?;
    let state = AppState::open(CorpusDocument::new(samples::all(), "samples"), dir.path(), None)?;

    let michigan = samples::michigan();
    let body = json!({ "label": michigan.label, "explanation": michigan.explanation, "version": 0 });
    send(&state, "POST", "/examples/michigan-stadium/annotation", Some(body.clone())).await;
    send(&state, "POST", "/examples/michigan-stadium/annotation", Some(body)).await;
    send(&state, "POST", "/examples/michigan-stadium/pattern-preview", None).await;

    for verdict in [true, false] {
        let item = send(&state, "GET", "/judge/next?condition=qed&session=demo", None).await;
        let id = item["instance_id"].clone();
        send(&state, "POST", "/judge/verdict", Some(json!({ "session": "demo", "instance_id": id, "verdict": verdict }))).await;
    }
    send(&state, "GET", "/reports/rater", None).await;
    Ok(())
}
