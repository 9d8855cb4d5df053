//! The `ssd` command line.
//!
//! Exit status: 0 on success, 1 for a domain error (printed as a single
//! `ERROR <Code>: <detail>` line on stderr), 2 for a usage error.

use std::collections::BTreeMap;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use ssd_core::audit::{AccountingSummary, BankReport};
use ssd_core::canonical::to_canonical_json;
use ssd_core::chain::{
    replay_bytes, Allocation, BlockLog, FeePolicy, Genesis, Role, SignedTransaction, TransactionPayload,
};
use ssd_core::content::{build_filter, extract_words, BloomFilterParams};
use ssd_core::crypto::{hash256, keygen, KeyPair};
use ssd_core::payment::{compute_pay_code, PayParam};
use ssd_core::sim::{run_simulation, ScenarioScript};
use ssd_core::stamps::{default_stamps, StampParam, StampUpdate};
use ssd_core::{Address, Digest32, TokenAmount};

use crate::client::Client;
use crate::config::{self, NodeConfig, DEFAULT_PORT, ENV_DATA_DIR, ENV_GENESIS, ENV_PORT};
use crate::keyfile::{self, KeyFile};
use crate::query::{self, QueryError, Snapshot};
use crate::service::{self, unix_now, Service};

#[derive(Parser, Debug)]
#[command(name = "ssd", version, about = "Stamp-duty ledger node and client")]
struct Cli {
    /// Node API base URL.
    #[arg(long, global = true, env = "SSD_NODE", default_value = "http://127.0.0.1:8645")]
    node: String,

    /// Answer read-only commands from a local data directory instead of a node.
    #[arg(long, global = true)]
    offline: bool,

    #[arg(long, global = true, env = ENV_DATA_DIR)]
    data_dir: Option<PathBuf>,

    #[arg(long, global = true, env = ENV_GENESIS)]
    genesis: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a key pair and write it as a key file.
    Keygen {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        role: Option<RoleArg>,
        /// 32-byte hex seed for a reproducible key.
        #[arg(long)]
        seed: Option<String>,
    },
    /// Genesis file helpers.
    #[command(subcommand)]
    Genesis(GenesisCmd),
    /// Mint new tokens (authority only).
    Mint(TokenArgs),
    /// Transfer tokens.
    Transfer(TokenArgs),
    /// Stamp registry.
    #[command(subcommand)]
    Stamp(StampCmd),
    /// Pay stamp duty on a document file.
    Pay {
        #[command(flatten)]
        signer: Signer,
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        stamp: String,
        /// Also write the payment receipt here.
        #[arg(long)]
        receipt: Option<PathBuf>,
    },
    /// Look up payments for a document file by its hash.
    Verify {
        #[arg(long)]
        file: PathBuf,
    },
    /// Match a document's words against a payment's recorded filter.
    Match {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        paycode: Digest32,
    },
    Balance {
        address: Address,
    },
    Status,
    Block {
        height: u64,
    },
    Payment {
        pay_code: Digest32,
    },
    /// Bank reports, reconciliation, accounting and burns.
    #[command(subcommand)]
    Audit(AuditCmd),
    /// Run or replay a node.
    #[command(subcommand)]
    Node(NodeCmd),
    /// Multi-validator simulation.
    #[command(subcommand)]
    Sim(SimCmd),
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum RoleArg {
    Authority,
    Bank,
    User,
    Validator,
}

impl From<RoleArg> for Role {
    fn from(r: RoleArg) -> Role {
        match r {
            RoleArg::Authority => Role::Authority,
            RoleArg::Bank => Role::Bank,
            RoleArg::User => Role::User,
            RoleArg::Validator => Role::Validator,
        }
    }
}

#[derive(Args, Debug)]
struct Signer {
    /// Key file of the signing account.
    #[arg(long)]
    key: PathBuf,
    /// Return once the node queues the transaction instead of waiting
    /// for it to be included in a block.
    #[arg(long)]
    no_wait: bool,
    #[arg(long, default_value_t = 30)]
    timeout_secs: u64,
}

#[derive(Args, Debug)]
struct TokenArgs {
    #[command(flatten)]
    signer: Signer,
    #[arg(long)]
    to: Address,
    #[arg(long)]
    amount: u64,
}

#[derive(Subcommand, Debug)]
enum GenesisCmd {
    /// Write a genesis file.
    Init {
        #[arg(long, default_value = "ssd")]
        chain_id: String,
        /// Genesis time in Unix seconds; defaults to now.
        #[arg(long)]
        time: Option<u64>,
        #[arg(long)]
        owner: Address,
        #[arg(long = "validator", required = true)]
        validators: Vec<Address>,
        /// ADDRESS=AMOUNT, repeatable.
        #[arg(long = "alloc", value_parser = parse_alloc)]
        allocations: Vec<(Address, u64)>,
        #[arg(long = "bank")]
        banks: Vec<Address>,
        #[arg(long = "user")]
        users: Vec<Address>,
        /// Enable a flat per-transaction fee of this amount.
        #[arg(long)]
        fee: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_alloc(s: &str) -> Result<(Address, u64), String> {
    let (a, n) = s.split_once('=').ok_or("expected ADDRESS=AMOUNT")?;
    let addr = a.parse::<Address>().map_err(|e| e.to_string())?;
    let amount = n.parse::<u64>().map_err(|e| e.to_string())?;
    Ok((addr, amount))
}

#[derive(Subcommand, Debug)]
enum StampCmd {
    Add {
        #[command(flatten)]
        signer: Signer,
        #[arg(long)]
        code: String,
        #[arg(long)]
        name: String,
        #[arg(long)]
        price: u64,
        #[arg(long)]
        reference: String,
    },
    Update {
        #[command(flatten)]
        signer: Signer,
        #[arg(long)]
        code: String,
        #[arg(long)]
        price: Option<u64>,
        #[arg(long)]
        active: Option<bool>,
        #[arg(long)]
        reference: Option<String>,
    },
    /// Show one stamp, or all of them.
    Show { code: Option<String> },
}

#[derive(Subcommand, Debug)]
enum AuditCmd {
    /// Build and sign a bank report from the chain.
    Report {
        /// The bank's key file.
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        start: u64,
        #[arg(long)]
        end: u64,
        /// Override the reported total, e.g. to rehearse a bad report.
        #[arg(long)]
        reported: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a signed bank report against the chain.
    Reconcile {
        #[arg(long)]
        report: PathBuf,
    },
    Accounting {
        #[arg(long)]
        json: bool,
    },
    /// Burn audited revenue (authority only).
    Burn {
        #[command(flatten)]
        signer: Signer,
        #[arg(long)]
        amount: u64,
    },
}

#[derive(Subcommand, Debug)]
enum NodeCmd {
    Run {
        /// Validator key file; omit to run an observer.
        #[arg(long)]
        key: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[arg(long, env = ENV_PORT, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value_t = 2000)]
        block_interval_ms: u64,
        /// Expected fee flag; startup fails if the genesis disagrees.
        #[arg(long)]
        fee: Option<bool>,
    },
    /// Rebuild state from a block log and print the resulting root.
    Replay {
        /// Log file; defaults to blocks.jsonl in the data directory.
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum SimCmd {
    Run {
        #[arg(long)]
        validators: usize,
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: String,
    pub detail: String,
}

impl CliError {
    fn new(code: &str, detail: impl Into<String>) -> CliError {
        CliError {
            code: code.into(),
            detail: detail.into(),
        }
    }
}

impl From<QueryError> for CliError {
    fn from(e: QueryError) -> CliError {
        CliError::new(&e.code, e.detail)
    }
}

impl From<keyfile::KeyFileError> for CliError {
    fn from(e: keyfile::KeyFileError) -> CliError {
        CliError::new(e.code(), e.to_string())
    }
}

impl From<service::ServiceError> for CliError {
    fn from(e: service::ServiceError) -> CliError {
        CliError::new(e.code(), e.to_string())
    }
}

impl From<ssd_core::chain::ChainError> for CliError {
    fn from(e: ssd_core::chain::ChainError) -> CliError {
        CliError::new(e.code(), e.to_string())
    }
}

type Out = Result<(), CliError>;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::new("Io", format!("{}: {e}", path.display()))
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| io_err(path, e))
}

fn write_file(path: &Path, text: &str) -> Out {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn print_json(v: &Value) {
    println!("{}", to_canonical_json(v));
}

/// Where read-only questions are answered.
enum Backend {
    Remote(Client),
    Local(Box<Snapshot>),
}

impl Backend {
    fn get(&self, path: &str) -> Result<Value, CliError> {
        Ok(match self {
            Backend::Remote(c) => c.get(path)?,
            Backend::Local(s) => query::get(s, path)?,
        })
    }

    fn post(&self, path: &str, body: String) -> Result<Value, CliError> {
        Ok(match self {
            Backend::Remote(c) => c.post(path, body)?,
            Backend::Local(s) => query::post(s, path, body.as_bytes())?,
        })
    }
}

struct Ctx {
    cli_node: String,
    offline: bool,
    data_dir: Option<PathBuf>,
    genesis: Option<PathBuf>,
}

impl Ctx {
    fn genesis_path(&self) -> Result<&Path, CliError> {
        self.genesis
            .as_deref()
            .ok_or_else(|| CliError::new("Usage", format!("--genesis or {ENV_GENESIS} is required")))
    }

    fn data_dir(&self) -> Result<&Path, CliError> {
        self.data_dir
            .as_deref()
            .ok_or_else(|| CliError::new("Usage", format!("--data-dir or {ENV_DATA_DIR} is required")))
    }

    fn client(&self) -> Result<Client, CliError> {
        if self.offline {
            return Err(CliError::new("Usage", "this command needs a running node; drop --offline"));
        }
        Ok(Client::new(&self.cli_node))
    }

    fn backend(&self) -> Result<Backend, CliError> {
        if !self.offline {
            return Ok(Backend::Remote(Client::new(&self.cli_node)));
        }
        let genesis = config::load_genesis(self.genesis_path()?)?;
        let bytes = BlockLog::read_bytes(self.data_dir()?.join("blocks.jsonl"))?;
        let node = replay_bytes(&genesis, &bytes).map_err(ssd_core::chain::ChainError::from)?;
        Ok(Backend::Local(Box::new(Snapshot::from_node(&node))))
    }
}

pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let ctx = Ctx {
        cli_node: cli.node,
        offline: cli.offline,
        data_dir: cli.data_dir,
        genesis: cli.genesis,
    };
    match dispatch(&ctx, cli.command) {
        Ok(()) => 0,
        Err(e) if e.code == "Usage" => {
            eprintln!("error: {}", e.detail);
            2
        }
        Err(e) => {
            eprintln!("ERROR {}: {}", e.code, e.detail);
            1
        }
    }
}

fn dispatch(ctx: &Ctx, cmd: Command) -> Out {
    match cmd {
        Command::Keygen { out, role, seed } => cmd_keygen(out, role, seed),
        Command::Genesis(g) => cmd_genesis(g),
        Command::Mint(a) => {
            let to = a.to;
            send(ctx, &a.signer, TransactionPayload::Mint {
                to,
                amount: TokenAmount(a.amount),
            })
            .map(|v| print_json(&v))
        }
        Command::Transfer(a) => {
            let to = a.to;
            send(ctx, &a.signer, TransactionPayload::Transfer {
                to,
                amount: TokenAmount(a.amount),
            })
            .map(|v| print_json(&v))
        }
        Command::Stamp(s) => cmd_stamp(ctx, s),
        Command::Pay {
            signer,
            file,
            stamp,
            receipt,
        } => cmd_pay(ctx, &signer, &file, &stamp, receipt.as_deref()),
        Command::Verify { file } => cmd_verify(ctx, &file),
        Command::Match { file, paycode } => {
            let text = String::from_utf8(read_file(&file)?)
                .map_err(|e| CliError::new("BadEncoding", format!("{}: {e}", file.display())))?;
            let body = to_canonical_json(&json!({"pay_code": paycode, "text": text}));
            print_json(&ctx.backend()?.post("/verify-content", body)?);
            Ok(())
        }
        Command::Balance { address } => {
            print_json(&ctx.backend()?.get(&format!("/balance/{address}"))?);
            Ok(())
        }
        Command::Status => {
            print_json(&ctx.backend()?.get("/status")?);
            Ok(())
        }
        Command::Block { height } => {
            print_json(&ctx.backend()?.get(&format!("/block/{height}"))?);
            Ok(())
        }
        Command::Payment { pay_code } => {
            print_json(&ctx.backend()?.get(&format!("/payment/{pay_code}"))?);
            Ok(())
        }
        Command::Audit(a) => cmd_audit(ctx, a),
        Command::Node(n) => cmd_node(ctx, n),
        Command::Sim(SimCmd::Run {
            validators,
            script,
            json,
        }) => cmd_sim(validators, &script, json),
    }
}

fn cmd_keygen(out: Option<PathBuf>, role: Option<RoleArg>, seed: Option<String>) -> Out {
    let seed = match seed {
        Some(hex) => {
            let raw = ssd_core::crypto::decode_hex_exact(&hex, 32)
                .map_err(|_| CliError::new("InvalidHex", "seed must be 0x-prefixed lowercase hex of 32 bytes"))?;
            let mut s = [0u8; 32];
            s.copy_from_slice(&raw);
            Some(s)
        }
        None => None,
    };
    let key = keygen(seed).map_err(|e| CliError::new("InvalidPrivateKey", e.to_string()))?;
    let file = KeyFile::from_key(&key, role.map(Role::from));
    match out {
        Some(path) => {
            keyfile::save(&path, &file)?;
            println!("{}", key.address());
        }
        None => println!("{}", file.to_json()),
    }
    Ok(())
}

fn cmd_genesis(cmd: GenesisCmd) -> Out {
    let GenesisCmd::Init {
        chain_id,
        time,
        owner,
        validators,
        allocations,
        banks,
        users,
        fee,
        out,
    } = cmd;
    let mut roles = BTreeMap::new();
    for v in &validators {
        roles.insert(*v, Role::Validator);
    }
    for b in banks {
        roles.insert(b, Role::Bank);
    }
    for u in users {
        roles.insert(u, Role::User);
    }
    let genesis = Genesis {
        chain_id,
        genesis_time: time.unwrap_or_else(unix_now),
        owner,
        validators,
        allocations: allocations
            .into_iter()
            .map(|(address, amount)| Allocation {
                address,
                amount: TokenAmount(amount),
            })
            .collect(),
        stamps: default_stamps(),
        fee: match fee {
            Some(amount) => FeePolicy {
                enabled: true,
                amount: TokenAmount(amount),
            },
            None => FeePolicy::default(),
        },
        roles,
    };
    genesis.initial_state()?;
    let text = to_canonical_json(&genesis) + "\n";
    match out {
        Some(path) => write_file(&path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Signs `payload` with the next nonce, submits it and, unless told not
/// to, waits for its receipt. Rejections become errors.
fn send(ctx: &Ctx, signer: &Signer, payload: TransactionPayload) -> Result<Value, CliError> {
    let (_, key) = keyfile::load(&signer.key)?;
    send_with(ctx, signer, &key, payload)
}

fn send_with(ctx: &Ctx, signer: &Signer, key: &KeyPair, payload: TransactionPayload) -> Result<Value, CliError> {
    let client = ctx.client()?;
    let nonce_v = client.get(&format!("/nonce/{}", key.address()))?;
    let nonce = nonce_v["nonce"]
        .as_str()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| CliError::new("BadResponse", format!("nonce response {nonce_v}")))?;
    let tx = SignedTransaction::sign(key, nonce, payload);
    let resp = client.submit(&tx)?;
    if resp["accepted"] != Value::Bool(true) {
        let reason = resp["reason"].as_str().unwrap_or("Rejected");
        return Err(CliError::new(reason, format!("transaction {} rejected", tx.hash())));
    }
    if signer.no_wait {
        return Ok(json!({"status": "pending", "tx_hash": tx.hash()}));
    }
    let mut status = client.wait_for(&tx.hash(), Duration::from_secs(signer.timeout_secs))?;
    if status["status"] == "rejected" {
        let reason = status["reason"].as_str().unwrap_or("Rejected").to_string();
        return Err(CliError::new(
            &reason,
            format!("transaction {} rejected in block {}", tx.hash(), status["height"]),
        ));
    }
    status["tx_hash"] = json!(tx.hash());
    Ok(status)
}

fn cmd_stamp(ctx: &Ctx, cmd: StampCmd) -> Out {
    match cmd {
        StampCmd::Add {
            signer,
            code,
            name,
            price,
            reference,
        } => {
            let stamp = StampParam::new(&code, &name, price, &reference);
            print_json(&send(ctx, &signer, TransactionPayload::AddStamp { stamp })?);
        }
        StampCmd::Update {
            signer,
            code,
            price,
            active,
            reference,
        } => {
            let update = StampUpdate {
                price: price.map(TokenAmount),
                active,
                reference,
            };
            print_json(&send(ctx, &signer, TransactionPayload::UpdateStamp {
                stamp_code: code,
                update,
            })?);
        }
        StampCmd::Show { code } => {
            let path = match code {
                Some(c) => format!("/stamp/{c}"),
                None => "/stamps".into(),
            };
            print_json(&ctx.backend()?.get(&path)?);
        }
    }
    Ok(())
}

fn cmd_pay(ctx: &Ctx, signer: &Signer, file: &Path, stamp: &str, receipt: Option<&Path>) -> Out {
    let (_, key) = keyfile::load(&signer.key)?;
    let bytes = read_file(file)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| CliError::new("BadEncoding", format!("{}: {e}", file.display())))?;
    let words = extract_words(text);
    if words.is_empty() {
        return Err(CliError::new("EmptyDocument", format!("{} has no words", file.display())));
    }
    let doc_hash = hash256(&bytes);
    let time_stamp = unix_now();
    let payload = TransactionPayload::PayStampDuty {
        doc_hash,
        stamp_code: stamp.to_string(),
        bloom_filter: build_filter(&words, BloomFilterParams::DEFAULT),
        time_stamp,
        payer_signature: key.sign(&doc_hash),
    };
    let status = send_with(ctx, signer, &key, payload)?;
    if signer.no_wait {
        print_json(&status);
        return Ok(());
    }
    let pay_code = compute_pay_code(&doc_hash, &key.address(), stamp, time_stamp)
        .map_err(|e| CliError::new(e.code(), e.to_string()))?;
    let record_v = ctx.client()?.get(&format!("/payment/{pay_code}"))?;
    let record: PayParam = serde_json::from_value(record_v)
        .map_err(|e| CliError::new("BadResponse", e.to_string()))?;
    let text = record.receipt_json();
    if let Some(path) = receipt {
        write_file(path, &(text.clone() + "\n"))?;
    }
    println!("{text}");
    Ok(())
}

fn cmd_verify(ctx: &Ctx, file: &Path) -> Out {
    let doc_hash = hash256(&read_file(file)?);
    let v = ctx.backend()?.get(&format!("/payments/by-doc/{doc_hash}"))?;
    let records = v.as_array().cloned().unwrap_or_default();
    if records.is_empty() {
        return Err(CliError::new(
            "NoPaymentFound",
            format!("no payment found for document {doc_hash}"),
        ));
    }
    for r in &records {
        print_json(r);
    }
    Ok(())
}

fn cmd_audit(ctx: &Ctx, cmd: AuditCmd) -> Out {
    match cmd {
        AuditCmd::Report {
            key,
            start,
            end,
            reported,
            out,
        } => {
            let (_, bank) = keyfile::load(&key)?;
            let v = ctx
                .backend()?
                .get(&format!("/audit/report/{}/{start}/{end}", bank.address()))?;
            let mut report: BankReport =
                serde_json::from_value(v).map_err(|e| CliError::new("BadResponse", e.to_string()))?;
            if let Some(r) = reported {
                report.reported_tokens_sold = TokenAmount(r);
            }
            let text = to_canonical_json(&report.sign(&bank));
            match out {
                Some(path) => write_file(&path, &(text + "\n"))?,
                None => println!("{text}"),
            }
        }
        AuditCmd::Reconcile { report } => {
            let body = String::from_utf8(read_file(&report)?)
                .map_err(|e| CliError::new("BadEncoding", e.to_string()))?;
            print_json(&ctx.backend()?.post("/audit/reconcile", body)?);
        }
        AuditCmd::Accounting { json } => {
            let v = ctx.backend()?.get("/audit/accounting")?;
            if json {
                print_json(&v);
            } else {
                print_accounting(&v)?;
            }
        }
        AuditCmd::Burn { signer, amount } => {
            print_json(&send(ctx, &signer, TransactionPayload::Burn {
                amount: TokenAmount(amount),
            })?);
        }
    }
    Ok(())
}

fn print_accounting(v: &Value) -> Out {
    #[derive(serde::Deserialize)]
    struct Row {
        minted: TokenAmount,
        held_by_banks: TokenAmount,
        circulating_with_users: TokenAmount,
        collected_by_authority: TokenAmount,
        burned: TokenAmount,
        unlabeled: Vec<Address>,
    }
    let r: Row = serde_json::from_value(v.clone()).map_err(|e| CliError::new("BadResponse", e.to_string()))?;
    let summary = AccountingSummary {
        minted: r.minted,
        held_by_banks: r.held_by_banks,
        circulating_with_users: r.circulating_with_users,
        collected_by_authority: r.collected_by_authority,
        burned: r.burned,
        unlabeled: r.unlabeled,
    };
    let rows = [
        ("minted", summary.minted),
        ("held by banks", summary.held_by_banks),
        ("circulating with users", summary.circulating_with_users),
        ("collected by authority", summary.collected_by_authority),
        ("burned", summary.burned),
    ];
    for (label, amount) in rows {
        println!("{label:<24}{:>16}", amount.0);
    }
    let identity = if summary.identity_holds() { "holds" } else { "BROKEN" };
    println!("{:<24}{:>16}", "identity", identity);
    for a in &summary.unlabeled {
        println!("note: {a} has no role label and is counted as a user");
    }
    Ok(())
}

fn cmd_node(ctx: &Ctx, cmd: NodeCmd) -> Out {
    match cmd {
        NodeCmd::Run {
            key,
            host,
            port,
            block_interval_ms,
            fee,
        } => {
            let mut config = NodeConfig::new(ctx.data_dir()?, ctx.genesis_path()?);
            config.listen = SocketAddr::new(host, port);
            config.key_file = key;
            config.fee = fee;
            config.block_interval = Duration::from_millis(block_interval_ms.max(10));
            run_node(config)
        }
        NodeCmd::Replay { log } => {
            let genesis = config::load_genesis(ctx.genesis_path()?)?;
            let path = match log {
                Some(p) => p,
                None => ctx.data_dir()?.join("blocks.jsonl"),
            };
            let bytes = read_file(&path)?;
            let node = replay_bytes(&genesis, &bytes).map_err(|e| {
                CliError::new(e.reason.code(), format!("block {}: {}", e.height, e.reason))
            })?;
            print_json(&json!({
                "height": node.height().to_string(),
                "state_root": node.state().state_root(),
                "tip_hash": node.tip().hash(),
            }));
            Ok(())
        }
    }
}

fn run_node(config: NodeConfig) -> Out {
    let service = std::sync::Arc::new(Service::open(&config)?);
    let role = match service.snapshot().validator {
        Some(a) => format!("validator {a}"),
        None => "observer".to_string(),
    };
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::new("Io", e.to_string()))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(config.listen)
            .await
            .map_err(|e| CliError::new("Io", format!("bind {}: {e}", config.listen)))?;
        let addr = listener.local_addr().map_err(|e| CliError::new("Io", e.to_string()))?;
        eprintln!(
            "ssd node listening on http://{addr} as {role}, height {}",
            service.snapshot().blocks.len() - 1
        );
        service::run(service, listener, config.block_interval, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
        Ok(())
    })
}

fn cmd_sim(validators: usize, script: &Path, as_json: bool) -> Out {
    let text = read_file(script)?;
    let script: ScenarioScript = serde_json::from_slice(&text)
        .map_err(|e| CliError::new("MalformedScript", format!("{}: {e}", script.display())))?;
    let report = run_simulation(validators, &script).map_err(|e| CliError::new("Simulation", e.to_string()))?;
    let roots = report.final_roots();
    let height = report.nodes[0].height();
    let rejected = report.tx_rejections(0).len();
    if as_json {
        print_json(&json!({
            "agree": report.all_agree(),
            "applied": report.applied_count().to_string(),
            "height": height.to_string(),
            "rejected": rejected.to_string(),
            "roots": roots,
        }));
    } else {
        for (i, r) in roots.iter().enumerate() {
            println!("node {i} height {height} root {r}");
        }
        println!("applied {} rejected {rejected}", report.applied_count());
        for r in &report.block_rejections {
            println!("node {} refused block {}: {}", r.node, r.height, r.reason);
        }
    }
    if !report.all_agree() {
        return Err(CliError::new("Disagreement", "nodes disagree on the state root"));
    }
    Ok(())
}
