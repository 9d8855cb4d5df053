//! HTTP JSON API. Bodies are canonical JSON; errors are
//! `{"detail":..., "error":<Code>}` with 400 for bad input, 404 for unknown
//! resources and 500 once the node has halted.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::Router;
use serde_json::json;
use ssd_core::canonical::to_canonical_json;
use ssd_core::chain::SignedTransaction;

use crate::query::{self, QueryError};
use crate::service::Service;

type Shared = Arc<Service>;

pub fn router(service: Shared) -> Router {
    Router::new()
        .route("/tx", post(submit_tx))
        .route("/verify-content", post(read_post))
        .route("/audit/reconcile", post(read_post))
        .fallback(read_get)
        .with_state(service)
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error_response(e: QueryError) -> Response {
    let status = StatusCode::from_u16(e.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    json_response(status, e.body())
}

fn answer(result: Result<serde_json::Value, QueryError>) -> Response {
    match result {
        Ok(v) => json_response(StatusCode::OK, to_canonical_json(&v)),
        Err(e) => error_response(e),
    }
}

async fn read_get(State(svc): State<Shared>, method: axum::http::Method, uri: Uri) -> Response {
    if method != axum::http::Method::GET {
        return error_response(QueryError::new(405, "MethodNotAllowed", format!("{method} {}", uri.path())));
    }
    answer(query::get(&svc.snapshot(), uri.path()))
}

async fn read_post(State(svc): State<Shared>, uri: Uri, body: Bytes) -> Response {
    answer(query::post(&svc.snapshot(), uri.path(), &body))
}

async fn submit_tx(State(svc): State<Shared>, body: Bytes) -> Response {
    let tx: SignedTransaction = match serde_json::from_slice(&body) {
        Ok(tx) => tx,
        Err(e) => return error_response(QueryError::bad_request("MalformedJson", e.to_string())),
    };
    let outcome = tokio::task::spawn_blocking(move || svc.submit(tx)).await;
    match outcome {
        Ok(Ok(o)) => json_response(
            StatusCode::OK,
            to_canonical_json(&json!({
                "accepted": o.accepted,
                "reason": o.reason,
                "tx_hash": o.tx_hash,
            })),
        ),
        Ok(Err(halted)) => error_response(QueryError::new(500, "Halted", halted.0)),
        Err(e) => error_response(QueryError::new(500, "Internal", e.to_string())),
    }
}
