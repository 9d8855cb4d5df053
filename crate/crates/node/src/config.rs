use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use ssd_core::chain::{ChainError, Genesis};

pub const ENV_DATA_DIR: &str = "SSD_DATA_DIR";
pub const ENV_GENESIS: &str = "SSD_GENESIS";
pub const ENV_PORT: &str = "SSD_PORT";
pub const DEFAULT_PORT: u16 = 8645;

#[derive(Debug, Clone)]
pub struct NodeConfig {
    pub data_dir: PathBuf,
    pub genesis_path: PathBuf,
    pub listen: SocketAddr,
    /// Validator key file; observers run without one.
    pub key_file: Option<PathBuf>,
    /// If set, must agree with the fee flag fixed in the genesis file.
    pub fee: Option<bool>,
    pub block_interval: Duration,
}

impl NodeConfig {
    pub fn new(data_dir: impl Into<PathBuf>, genesis_path: impl Into<PathBuf>) -> NodeConfig {
        NodeConfig {
            data_dir: data_dir.into(),
            genesis_path: genesis_path.into(),
            listen: SocketAddr::from(([127, 0, 0, 1], DEFAULT_PORT)),
            key_file: None,
            fee: None,
            block_interval: Duration::from_secs(2),
        }
    }

    pub fn blocks_path(&self) -> PathBuf {
        self.data_dir.join("blocks.jsonl")
    }

    pub fn genesis_hash_path(&self) -> PathBuf {
        self.data_dir.join("genesis_hash")
    }
}

pub fn load_genesis(path: &Path) -> Result<Genesis, ChainError> {
    let text = fs::read_to_string(path)?;
    let genesis: Genesis = serde_json::from_str(&text)
        .map_err(|e| ChainError::InvalidGenesis(format!("{}: {e}", path.display())))?;
    genesis.validate()?;
    Ok(genesis)
}
