use serde::{Deserialize, Serialize};

use crate::canonical::{canonical_hash, dec_u64};
use crate::crypto::{Address, Digest32, KeyPair, Signature};

use super::tx::SignedTransaction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TxStatus {
    Applied,
    Rejected,
}

/// Outcome of one transaction inside a block. Rejected transactions are
/// kept in the block so every node can confirm the rejection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Receipt {
    pub tx_hash: Digest32,
    pub status: TxStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl Receipt {
    pub fn applied(&self) -> bool {
        self.status == TxStatus::Applied
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    #[serde(with = "dec_u64")]
    pub height: u64,
    pub prev_hash: Digest32,
    #[serde(with = "dec_u64")]
    pub block_time: u64,
    pub txs: Vec<SignedTransaction>,
    pub receipts: Vec<Receipt>,
    pub proposer: Address,
    pub state_root: Digest32,
    /// Absent only on the genesis block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposer_signature: Option<Signature>,
}

impl Block {
    /// Hash of the block without its signature; this is what the proposer signs.
    pub fn signing_digest(&self) -> Digest32 {
        let mut unsigned = self.clone();
        unsigned.proposer_signature = None;
        canonical_hash(&unsigned)
    }

    /// Hash of the full serialized block, used as the next block's `prev_hash`.
    pub fn hash(&self) -> Digest32 {
        canonical_hash(self)
    }

    pub fn sign(&mut self, key: &KeyPair) {
        self.proposer_signature = None;
        self.proposer_signature = Some(key.sign(&self.signing_digest()));
    }

    /// Applied transactions with their receipts.
    pub fn applied(&self) -> impl Iterator<Item = &SignedTransaction> {
        self.txs
            .iter()
            .zip(&self.receipts)
            .filter(|(_, r)| r.applied())
            .map(|(t, _)| t)
    }
}
