//! The permissioned replication layer.
//!
//! Validators are fixed at genesis and take turns proposing, one block per
//! height (`validators[height % n]`). Every node re-executes every block and
//! accepts it only if its own post-state hashes to the block's `state_root`.
//! There are no forks and no Byzantine agreement; a block either extends the
//! single chain or is rejected.

pub mod block;
pub mod exec;
pub mod genesis;
pub mod log;
pub mod node;
pub mod tx;

use thiserror::Error;

use crate::crypto::Address;

pub use block::{Block, Receipt, TxStatus};
pub use exec::{apply_transaction, BlockContext, TxEffect, PAYMENT_TIME_WINDOW_SECS};
pub use genesis::{Allocation, FeePolicy, Genesis, Role};
pub use log::{replay, replay_bytes, replay_lines, BlockLog, ReplayError};
pub use node::Node;
pub use tx::{SignedTransaction, TransactionPayload};

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("invalid genesis: {0}")]
    InvalidGenesis(String),
    #[error("not this node's turn at height {height}; expected proposer {expected}")]
    NotMyTurn { height: u64, expected: Address },
    #[error("node has no validator key")]
    NoValidatorKey,
    #[error("genesis hash on disk does not match the genesis file")]
    GenesisMismatch,
    #[error("block log: {0}")]
    Replay(#[from] ReplayError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl ChainError {
    pub fn code(&self) -> &'static str {
        match self {
            ChainError::InvalidGenesis(_) => "InvalidGenesis",
            ChainError::NotMyTurn { .. } => "NotMyTurn",
            ChainError::NoValidatorKey => "NoValidatorKey",
            ChainError::GenesisMismatch => "GenesisMismatch",
            ChainError::Replay(_) => "ReplayFailed",
            ChainError::Io(_) => "Io",
        }
    }
}

/// Why a node refused a block.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlockRejection {
    #[error("bad linkage: {0}")]
    BadLinkage(String),
    #[error("proposer is not the scheduled validator")]
    WrongProposer,
    #[error("proposer signature missing or invalid")]
    BadProposerSig,
    #[error("block time precedes parent")]
    BadTimestamp,
    #[error("re-execution does not reproduce state_root")]
    StateRootMismatch,
    #[error("re-execution does not reproduce the receipts")]
    ReceiptMismatch,
    #[error("malformed block: {0}")]
    Malformed(String),
    #[error("block is not in canonical form")]
    NotCanonical,
}

impl BlockRejection {
    pub fn code(&self) -> &'static str {
        match self {
            BlockRejection::BadLinkage(_) => "BadLinkage",
            BlockRejection::WrongProposer => "WrongProposer",
            BlockRejection::BadProposerSig => "BadProposerSig",
            BlockRejection::BadTimestamp => "BadTimestamp",
            BlockRejection::StateRootMismatch => "StateRootMismatch",
            BlockRejection::ReceiptMismatch => "ReceiptMismatch",
            BlockRejection::Malformed(_) => "Malformed",
            BlockRejection::NotCanonical => "NotCanonical",
        }
    }
}
