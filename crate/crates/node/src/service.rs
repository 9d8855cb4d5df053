//! The running node. One writer owns the [`Node`] and its block log;
//! readers work from the last published [`Snapshot`].

use std::fs;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use ssd_core::chain::{replay_bytes, BlockLog, ChainError, Node, SignedTransaction};
use ssd_core::crypto::KeyPair;
use ssd_core::Digest32;
use thiserror::Error;
use tokio::sync::oneshot;

use crate::config::{load_genesis, NodeConfig};
use crate::keyfile;
use crate::query::Snapshot;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    KeyFile(#[from] keyfile::KeyFileError),
    #[error("key {0} is not in the genesis validator set")]
    NotAValidator(ssd_core::Address),
    #[error("fee flag {config} disagrees with genesis fee flag {genesis}")]
    FeeMismatch { config: bool, genesis: bool },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Chain(e) => e.code(),
            ServiceError::KeyFile(e) => e.code(),
            ServiceError::NotAValidator(_) => "NotAValidator",
            ServiceError::FeeMismatch { .. } => "FeeMismatch",
            ServiceError::Io(_) => "Io",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmitOutcome {
    pub accepted: bool,
    pub reason: Option<String>,
    pub tx_hash: Digest32,
}

/// Writes are refused once the node has halted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Halted(pub String);

struct Writer {
    node: Node,
    log: BlockLog,
}

pub struct Service {
    writer: Mutex<Writer>,
    snapshot: RwLock<Arc<Snapshot>>,
    halted: RwLock<Option<String>>,
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Opens (or initializes) the data directory and rebuilds the node from
/// its block log.
pub fn open_node(config: &NodeConfig) -> Result<(Node, BlockLog), ServiceError> {
    let genesis = load_genesis(&config.genesis_path)?;
    if let Some(flag) = config.fee {
        if flag != genesis.fee.enabled {
            return Err(ServiceError::FeeMismatch {
                config: flag,
                genesis: genesis.fee.enabled,
            });
        }
    }
    let key: Option<KeyPair> = match &config.key_file {
        Some(path) => Some(keyfile::load(path)?.1),
        None => None,
    };
    if let Some(k) = &key {
        if !genesis.validators.contains(&k.address()) {
            return Err(ServiceError::NotAValidator(k.address()));
        }
    }

    fs::create_dir_all(&config.data_dir)?;
    let genesis_block = genesis.genesis_block()?;
    let hash_path = config.genesis_hash_path();
    match fs::read_to_string(&hash_path) {
        Ok(recorded) => {
            if recorded.trim() != genesis_block.hash().to_hex() {
                return Err(ChainError::GenesisMismatch.into());
            }
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            fs::write(&hash_path, genesis_block.hash().to_hex() + "\n")?;
        }
        Err(e) => return Err(e.into()),
    }

    let bytes = BlockLog::read_bytes(config.blocks_path())?;
    let mut node = replay_bytes(&genesis, &bytes).map_err(ChainError::from)?;
    let mut log = BlockLog::open(config.blocks_path())?;
    if bytes.is_empty() {
        log.append(&genesis_block)?;
    }
    node.set_key(key);
    Ok((node, log))
}

impl Service {
    pub fn open(config: &NodeConfig) -> Result<Service, ServiceError> {
        let (node, log) = open_node(config)?;
        let snapshot = Arc::new(Snapshot::from_node(&node));
        Ok(Service {
            writer: Mutex::new(Writer { node, log }),
            snapshot: RwLock::new(snapshot),
            halted: RwLock::new(None),
        })
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock").clone()
    }

    pub fn halted(&self) -> Option<String> {
        self.halted.read().expect("halt lock").clone()
    }

    fn halt(&self, why: String) {
        eprintln!("halting writes: {why}");
        *self.halted.write().expect("halt lock") = Some(why);
    }

    fn publish(&self, node: &Node) {
        let mut snap = Snapshot::from_node(node);
        snap.halted = self.halted();
        *self.snapshot.write().expect("snapshot lock") = Arc::new(snap);
    }

    /// Dry-runs `tx` against the tip plus the mempool and queues it if it
    /// would apply now. Rejections are a normal outcome, not an error.
    pub fn submit(&self, tx: SignedTransaction) -> Result<SubmitOutcome, Halted> {
        if let Some(why) = self.halted() {
            return Err(Halted(why));
        }
        let tx_hash = tx.hash();
        let mut w = self.writer.lock().expect("writer lock");
        let block_time = unix_now().max(w.node.tip().block_time);
        let outcome = match w.node.dry_run(&tx, block_time) {
            Ok(_) => {
                w.node.submit(tx);
                SubmitOutcome {
                    accepted: true,
                    reason: None,
                    tx_hash,
                }
            }
            Err(e) => SubmitOutcome {
                accepted: false,
                reason: Some(e.code().to_string()),
                tx_hash,
            },
        };
        self.publish(&w.node);
        Ok(outcome)
    }

    /// Proposes, self-validates, persists and publishes a block if it is
    /// this node's turn and something is queued. Returns the new height.
    pub fn produce(&self, now: u64) -> Option<u64> {
        if self.halted().is_some() {
            return None;
        }
        let mut w = self.writer.lock().expect("writer lock");
        if !w.node.is_my_turn() || w.node.mempool().is_empty() {
            return None;
        }
        let block = match w.node.propose_block(now) {
            Ok(b) => b,
            Err(e) => {
                self.halt(format!("propose failed: {e}"));
                return None;
            }
        };
        if let Err(e) = w.node.validate_and_append(block.clone()) {
            self.halt(format!("own block {} rejected: {e}", block.height));
            self.publish(&w.node);
            return None;
        }
        if let Err(e) = w.log.append(&block) {
            self.halt(format!("block log write failed: {e}"));
        }
        if let Err(e) = w.node.check_invariants() {
            self.halt(format!("invariant breach at height {}: {e}", block.height));
        }
        self.publish(&w.node);
        Some(block.height)
    }
}

/// A node serving on a background runtime, for tests and embedding.
pub struct RunningNode {
    pub addr: SocketAddr,
    pub service: Arc<Service>,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl RunningNode {
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn stop(mut self) {
        self.shutdown_now();
    }

    fn shutdown_now(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for RunningNode {
    fn drop(&mut self) {
        self.shutdown_now();
    }
}

/// Starts the node on its own thread and runtime. `config.listen` may use
/// port 0; the bound address is returned.
pub fn spawn(config: NodeConfig) -> Result<RunningNode, ServiceError> {
    let service = Arc::new(Service::open(&config)?);
    let std_listener = std::net::TcpListener::bind(config.listen)?;
    std_listener.set_nonblocking(true)?;
    let addr = std_listener.local_addr()?;
    let (tx, rx) = oneshot::channel();
    let svc = service.clone();
    let interval = config.block_interval;
    let thread = std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .expect("tokio runtime");
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(std_listener).expect("listener");
            run(svc, listener, interval, async {
                let _ = rx.await;
            })
            .await;
        });
    });
    Ok(RunningNode {
        addr,
        service,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}

/// Serves the API and drives block production until `shutdown` resolves.
pub async fn run(
    service: Arc<Service>,
    listener: tokio::net::TcpListener,
    block_interval: std::time::Duration,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) {
    let producer = {
        let svc = service.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(block_interval);
            tick.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
            loop {
                tick.tick().await;
                let s = svc.clone();
                let _ = tokio::task::spawn_blocking(move || s.produce(unix_now())).await;
            }
        })
    };
    let app = crate::api::router(service);
    if let Err(e) = axum::serve(listener, app).with_graceful_shutdown(shutdown).await {
        eprintln!("server error: {e}");
    }
    producer.abort();
}
