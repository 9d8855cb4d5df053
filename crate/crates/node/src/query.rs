//! Read-only queries over a node's view of the chain.
//!
//! The HTTP API and the CLI's offline mode both answer through [`get`] and
//! [`post`], so the same question gets byte-identical canonical JSON from
//! either surface.

use serde::Deserialize;
use serde_json::{json, Value};
use ssd_core::audit::{
    compute_accounting, generate_bank_report, reconcile_signed, Period, SignedBankReport,
};
use ssd_core::canonical::{dec_u64, to_canonical_json};
use ssd_core::chain::{Block, Genesis, SignedTransaction, TxStatus};
use ssd_core::content::match_content;
use ssd_core::{Address, Digest32, LedgerState};

/// Everything a read needs; the service publishes one per accepted block.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub genesis: Genesis,
    pub state: LedgerState,
    pub blocks: Vec<Block>,
    pub mempool: Vec<SignedTransaction>,
    pub validator: Option<Address>,
    pub halted: Option<String>,
}

impl Snapshot {
    pub fn from_node(node: &ssd_core::chain::Node) -> Snapshot {
        Snapshot {
            genesis: node.genesis().clone(),
            state: node.state().clone(),
            blocks: node.blocks().to_vec(),
            mempool: node.mempool().to_vec(),
            validator: node.key().map(|k| k.address()),
            halted: None,
        }
    }

    /// Next nonce `sender` should use, counting its queued transactions.
    pub fn next_nonce(&self, sender: &Address) -> u64 {
        self.state.nonce_of(sender) + self.mempool.iter().filter(|t| t.sender == *sender).count() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryError {
    pub status: u16,
    pub code: String,
    pub detail: String,
}

impl QueryError {
    pub fn new(status: u16, code: &str, detail: impl Into<String>) -> QueryError {
        QueryError {
            status,
            code: code.into(),
            detail: detail.into(),
        }
    }

    pub fn bad_request(code: &str, detail: impl Into<String>) -> QueryError {
        QueryError::new(400, code, detail)
    }

    pub fn not_found(code: &str, detail: impl Into<String>) -> QueryError {
        QueryError::new(404, code, detail)
    }

    pub fn body(&self) -> String {
        to_canonical_json(&json!({"error": self.code, "detail": self.detail}))
    }
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, QueryError> {
    s.parse()
        .map_err(|_| QueryError::bad_request("BadRequest", format!("{what} {s:?} is malformed")))
}

fn parse_u64(s: &str, what: &str) -> Result<u64, QueryError> {
    dec_u64::parse(s).map_err(|_| QueryError::bad_request("BadRequest", format!("{what} {s:?} is not a decimal integer")))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("ledger types serialize")
}

/// Answers a GET for `path` (without query string).
pub fn get(snap: &Snapshot, path: &str) -> Result<Value, QueryError> {
    let segs: Vec<&str> = path.trim_matches('/').split('/').collect();
    match segs.as_slice() {
        ["status"] => Ok(status(snap)),
        ["balance", addr] => {
            let a: Address = parse(addr, "address")?;
            Ok(json!({"balance": snap.state.tokens.balance_of(&a).0.to_string()}))
        }
        ["nonce", addr] => {
            let a: Address = parse(addr, "address")?;
            Ok(json!({"nonce": snap.next_nonce(&a).to_string()}))
        }
        ["stamps"] => Ok(to_value(&snap.state.stamps.iter().collect::<Vec<_>>())),
        ["stamp", code] => snap
            .state
            .stamps
            .get(code)
            .map(to_value)
            .map_err(|e| QueryError::not_found(e.code(), format!("no stamp {code:?}"))),
        ["payment", code] => {
            let c: Digest32 = parse(code, "pay code")?;
            snap.state
                .payments
                .get(&c)
                .map(to_value)
                .map_err(|e| QueryError::not_found(e.code(), format!("no payment {c}")))
        }
        ["payments", "by-doc", doc] => {
            let d: Digest32 = parse(doc, "document hash")?;
            Ok(to_value(&snap.state.payments.find_by_doc(&d)))
        }
        ["audit", "accounting"] => Ok(to_value(&compute_accounting(&snap.genesis, &snap.state))),
        ["audit", "report", bank, start, end] => {
            let bank: Address = parse(bank, "address")?;
            let period = Period::new(parse_u64(start, "start")?, parse_u64(end, "end")?)
                .map_err(|e| QueryError::bad_request(e.code(), e.to_string()))?;
            let report = generate_bank_report(&snap.genesis, &bank, period, &snap.blocks)
                .map_err(|e| QueryError::bad_request(e.code(), e.to_string()))?;
            Ok(to_value(&report))
        }
        ["block", h] => {
            let h = parse_u64(h, "height")?;
            snap.blocks
                .get(h as usize)
                .map(to_value)
                .ok_or_else(|| QueryError::not_found("UnknownBlock", format!("no block at height {h}")))
        }
        ["tx", hash] => {
            let hash: Digest32 = parse(hash, "transaction hash")?;
            tx_status(snap, &hash)
        }
        _ => Err(QueryError::not_found("NotFound", format!("no resource at {path}"))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyContent {
    text: String,
    pay_code: Digest32,
}

/// Answers a read-only POST. Transaction submission is not a query and is
/// handled by the service.
pub fn post(snap: &Snapshot, path: &str, body: &[u8]) -> Result<Value, QueryError> {
    let malformed = |e: serde_json::Error| QueryError::bad_request("MalformedJson", e.to_string());
    match path.trim_matches('/') {
        "verify-content" => {
            let req: VerifyContent = serde_json::from_slice(body).map_err(malformed)?;
            let record = snap
                .state
                .payments
                .get(&req.pay_code)
                .map_err(|e| QueryError::not_found(e.code(), format!("no payment {}", req.pay_code)))?;
            let result = match_content(&req.text, &record.bloom_filter)
                .map_err(|e| QueryError::bad_request(e.code(), e.to_string()))?;
            Ok(to_value(&result))
        }
        "audit/reconcile" => {
            let report: SignedBankReport = serde_json::from_slice(body).map_err(malformed)?;
            Ok(to_value(&reconcile_signed(&snap.genesis, &report, &snap.blocks)))
        }
        _ => Err(QueryError::not_found("NotFound", format!("no resource at {path}"))),
    }
}

fn status(snap: &Snapshot) -> Value {
    let tip = snap.blocks.last().expect("genesis block present");
    json!({
        "chain_id": snap.genesis.chain_id,
        "genesis_hash": snap.blocks[0].hash(),
        "halted": snap.halted,
        "height": tip.height.to_string(),
        "mempool": snap.mempool.len().to_string(),
        "next_proposer": snap.genesis.proposer_for(tip.height + 1),
        "state_root": snap.state.state_root(),
        "tip_hash": tip.hash(),
        "validator": snap.validator,
    })
}

fn tx_status(snap: &Snapshot, hash: &Digest32) -> Result<Value, QueryError> {
    for block in snap.blocks.iter().rev() {
        if let Some(r) = block.receipts.iter().find(|r| r.tx_hash == *hash) {
            let status = match r.status {
                TxStatus::Applied => "applied",
                TxStatus::Rejected => "rejected",
            };
            return Ok(json!({
                "height": block.height.to_string(),
                "reason": r.reason,
                "status": status,
            }));
        }
    }
    if snap.mempool.iter().any(|t| t.hash() == *hash) {
        return Ok(json!({"height": null, "reason": null, "status": "pending"}));
    }
    Err(QueryError::not_found("UnknownTransaction", format!("no transaction {hash}")))
}
