#![allow(dead_code)]

use std::process::Command;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use mobishift_core::Dataset;
use tower::ServiceExt;

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn cli(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_mobishift"))
        .args(args)
        .env_remove("MOBISHIFT_DATA_DIR")
        .output()
        .expect("binary runs");
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

pub fn app() -> axum::Router {
    mobishift_cli::router(Arc::new(Dataset::bundled().expect("bundled data")), None)
}

pub fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_current_thread().enable_all().build().expect("runtime")
}

pub async fn send(app: &axum::Router, req: Request<Body>) -> (StatusCode, Option<String>, String) {
    let res = app.clone().oneshot(req).await.expect("infallible service");
    let status = res.status();
    let ctype = res.headers().get("content-type").map(|v| v.to_str().unwrap().to_owned());
    let bytes = res.into_body().collect().await.expect("body").to_bytes();
    (status, ctype, String::from_utf8(bytes.to_vec()).expect("utf-8 body"))
}

pub async fn get(app: &axum::Router, uri: &str) -> (StatusCode, String) {
    let (s, _, b) = send(app, Request::get(uri).body(Body::empty()).unwrap()).await;
    (s, b)
}

pub async fn post(app: &axum::Router, uri: &str, body: &str) -> (StatusCode, String) {
    let req = Request::post(uri).header("content-type", "application/json").body(Body::from(body.to_owned())).unwrap();
    let (s, _, b) = send(app, req).await;
    (s, b)
}
