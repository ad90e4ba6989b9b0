// Fits a session, stores it in a session directory and queries the HTTP API
// in-process, the way the explorer front end does.

use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use dimcf::bench::DatasetSource;
use dimcf::ProjectorConfig;
use dimcf_service::{router, FitSettings, Session, SessionStore};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> Value {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .expect("valid request");
    let resp = app.clone().oneshot(req).await.expect("router is infallible");
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.expect("readable body");
    serde_json::from_slice(&bytes).expect("JSON body")
}

pub fn run_example() -> dimcf::Result<Value> {
    let dir = tempfile::tempdir()?;
    let session = Session::fit(FitSettings {
        data: DatasetSource::Toy { n: 200, d: 8, seed: None },
        projector: ProjectorConfig::from_method("linear").expect("known method"),
        seed: 0,
    })?;
    session.save(dir.path().join("toy-pca.json"))?;
    let app = router(Arc::new(SessionStore::open(dir.path())?));

    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let sessions = call(&app, "GET", "/sessions", None).await;
        println!("sessions: {}", sessions["sessions"]);

        let embedding = call(&app, "GET", "/sessions/toy-pca/embedding", None).await;
        let target = embedding["points"][42]["mapping"].clone();

        let body = json!({ "sample_index": 0, "y_cf": target, "k": 3, "C": 100.0 });
        let explain = call(&app, "POST", "/sessions/toy-pca/explain", Some(body)).await;
        for (n, m) in explain["explanation"]["members"].as_array().into_iter().flatten().enumerate() {
            println!("member {n}: changed {} map error {:.4}", m["changed_features"], m["map_error"].as_f64().unwrap_or(f64::NAN));
        }
        Ok(explain)
    })
}

fn main() -> dimcf::Result<()> {
    run_example().map(|_| ())
}
