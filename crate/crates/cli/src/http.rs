//! JSON service under `/api/v1`. Handlers return the same payload strings as
//! the CLI's `--format json`, so the two front ends never diverge.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use mobishift_core::api::{
    calculate_payload, case_payload, cases_payload, factors_payload, parse_calculation_request, sweep_payload,
    ApiError, CaseQuery, GridSpec, SweepKind, SweepQuery,
};
use mobishift_core::{Dataset, Error, FactorMode, Region};
use tower_http::cors::{Any, CorsLayer};
use tower_http::services::ServeDir;

use crate::reports::fleet_payload;

type Params = BTreeMap<String, String>;

#[derive(Clone)]
struct AppState {
    dataset: Arc<Dataset>,
}

/// Builds the service. With `static_dir`, unmatched paths are served from it
/// (the calculator UI's build output); otherwise they get a JSON 404.
pub fn router(dataset: Arc<Dataset>, static_dir: Option<PathBuf>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    let api = Router::new()
        .route("/api/v1/factors", get(factors))
        .route("/api/v1/case-studies", get(case_studies))
        .route("/api/v1/case-studies/{id}", get(case_study))
        .route("/api/v1/calculate", post(calculate))
        .route("/api/v1/sweeps/{kind}", get(sweep))
        .route("/api/v1/fleet", get(fleet))
        .with_state(AppState { dataset });
    let app = match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(not_found),
    };
    app.layer(cors)
}

/// HTTP status for an engine error code.
pub fn status_for(code: &str) -> StatusCode {
    match code {
        "unknown_case" | "not_found" => StatusCode::NOT_FOUND,
        "io_error" => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::BAD_REQUEST,
    }
}

fn json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn api_error(e: ApiError) -> Response {
    json(status_for(&e.code), e.to_json())
}

fn respond(result: Result<String, Error>) -> Response {
    match result {
        Ok(body) => json(StatusCode::OK, body),
        Err(e) => api_error(ApiError::from(&e)),
    }
}

async fn not_found() -> Response {
    api_error(ApiError::new("not_found", "no such endpoint"))
}

fn check_keys(params: &Params, allowed: &[&str]) -> Result<(), Error> {
    match params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(invalid(k, format!("unknown query parameter; expected one of {}", allowed.join(", ")))),
        None => Ok(()),
    }
}

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::InvalidInput { field: field.to_owned(), message: message.into() }
}

fn parse_opt<T: std::str::FromStr>(params: &Params, key: &str) -> Result<Option<T>, Error>
where
    T::Err: std::fmt::Display,
{
    match params.get(key).map(|v| v.trim()).filter(|v| !v.is_empty()) {
        None => Ok(None),
        Some(v) => v.parse().map(Some).map_err(|e| invalid(key, format!("`{v}`: {e}"))),
    }
}

/// Like [`parse_opt`] but keeps the engine's own error, e.g. `unknown_case`.
fn parse_engine<T: std::str::FromStr<Err = Error>>(params: &Params, key: &str) -> Result<Option<T>, Error> {
    params.get(key).map(|v| v.trim()).filter(|v| !v.is_empty()).map(str::parse).transpose()
}

fn parse_flag(params: &Params, key: &str) -> Result<bool, Error> {
    match params.get(key).map(|v| v.trim().to_ascii_lowercase()) {
        None => Ok(false),
        // A bare `?flag` switches it on.
        Some(v) => match v.as_str() {
            "" | "1" | "true" | "yes" => Ok(true),
            "0" | "false" | "no" => Ok(false),
            _ => Err(invalid(key, format!("`{v}` is not a boolean"))),
        },
    }
}

/// Case-study query string, shared with tests that build equivalent CLI calls.
pub fn case_query(params: &Params) -> Result<CaseQuery, Error> {
    check_keys(params, &["scenario", "no_modal_shift", "factor_mode", "lenient"])?;
    Ok(CaseQuery {
        scenario: parse_opt(params, "scenario")?,
        no_modal_shift: parse_flag(params, "no_modal_shift")?,
        factor_mode: parse_engine::<FactorMode>(params, "factor_mode")?,
        lenient: parse_flag(params, "lenient")?,
    })
}

pub fn sweep_query(params: &Params) -> Result<SweepQuery, Error> {
    check_keys(params, &["case", "points", "min", "max", "steps", "recompute_other"])?;
    let points = params
        .get("points")
        .map(|p| p.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_owned).collect())
        .unwrap_or_default();
    Ok(SweepQuery {
        case: parse_engine::<Region>(params, "case")?,
        points,
        min: parse_opt(params, "min")?,
        max: parse_opt(params, "max")?,
        steps: parse_opt(params, "steps")?,
        recompute_other: parse_flag(params, "recompute_other")?,
    })
}

async fn factors(State(s): State<AppState>, Query(params): Query<Params>) -> Response {
    respond((|| {
        check_keys(&params, &["grid", "scenario"])?;
        let grid: Option<GridSpec> = parse_engine(&params, "grid")?;
        factors_payload(&s.dataset, grid.as_ref(), parse_opt(&params, "scenario")?)
    })())
}

async fn case_studies(State(s): State<AppState>) -> Response {
    respond(cases_payload(&s.dataset))
}

async fn case_study(State(s): State<AppState>, Path(id): Path<String>, Query(params): Query<Params>) -> Response {
    respond((|| {
        let region: Region = id.parse()?;
        case_payload(&s.dataset, region, &case_query(&params)?)
    })())
}

async fn calculate(State(s): State<AppState>, body: Bytes) -> Response {
    let text = match std::str::from_utf8(&body) {
        Ok(t) => t,
        Err(_) => return api_error(ApiError::bad_request("body is not UTF-8")),
    };
    match parse_calculation_request(text) {
        Ok(req) => respond(calculate_payload(&s.dataset, &req)),
        Err(e) => api_error(e),
    }
}

async fn sweep(State(s): State<AppState>, Path(kind): Path<String>, Query(params): Query<Params>) -> Response {
    let kind: SweepKind = match kind.parse() {
        Ok(k) => k,
        Err(_) => return api_error(ApiError::new("not_found", format!("unknown sweep `{kind}`"))),
    };
    respond(sweep_query(&params).and_then(|q| sweep_payload(&s.dataset, kind, &q)))
}

async fn fleet(State(s): State<AppState>, Query(params): Query<Params>) -> Response {
    respond(check_keys(&params, &[]).and_then(|_| fleet_payload(&s.dataset, None)))
}
