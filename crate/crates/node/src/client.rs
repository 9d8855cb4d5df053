//! Blocking HTTP client used by the CLI.

use std::time::{Duration, Instant};

use serde_json::Value;
use ssd_core::canonical::to_canonical_json;
use ssd_core::chain::SignedTransaction;
use ssd_core::Digest32;

use crate::query::QueryError;

pub struct Client {
    base: String,
    http: reqwest::blocking::Client,
}

impl Client {
    pub fn new(base: &str) -> Client {
        Client {
            base: base.trim_end_matches('/').to_string(),
            http: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(30))
                .build()
                .expect("http client"),
        }
    }

    fn finish(&self, resp: reqwest::Result<reqwest::blocking::Response>) -> Result<Value, QueryError> {
        let resp = resp.map_err(|e| QueryError::new(0, "NodeUnreachable", format!("{}: {e}", self.base)))?;
        let status = resp.status().as_u16();
        let text = resp
            .text()
            .map_err(|e| QueryError::new(status, "BadResponse", e.to_string()))?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| QueryError::new(status, "BadResponse", format!("{e}: {text}")))?;
        if status == 200 {
            return Ok(v);
        }
        Err(QueryError::new(
            status,
            v["error"].as_str().unwrap_or("HttpError"),
            v["detail"].as_str().unwrap_or_default(),
        ))
    }

    pub fn get(&self, path: &str) -> Result<Value, QueryError> {
        self.finish(self.http.get(format!("{}{path}", self.base)).send())
    }

    pub fn post(&self, path: &str, body: String) -> Result<Value, QueryError> {
        self.finish(
            self.http
                .post(format!("{}{path}", self.base))
                .header("content-type", "application/json")
                .body(body)
                .send(),
        )
    }

    pub fn submit(&self, tx: &SignedTransaction) -> Result<Value, QueryError> {
        self.post("/tx", to_canonical_json(tx))
    }

    /// Polls until the transaction is in a block or `timeout` passes.
    pub fn wait_for(&self, tx_hash: &Digest32, timeout: Duration) -> Result<Value, QueryError> {
        let start = Instant::now();
        loop {
            let v = self.get(&format!("/tx/{tx_hash}"))?;
            if v["status"] != "pending" {
                return Ok(v);
            }
            if start.elapsed() > timeout {
                return Err(QueryError::new(
                    0,
                    "Timeout",
                    format!("transaction {tx_hash} still pending after {timeout:?}"),
                ));
            }
            std::thread::sleep(Duration::from_millis(100));
        }
    }
}
