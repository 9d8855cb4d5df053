//! A consortium node: replicated state, block log, mempool and the
//! round-robin proposer logic.

use std::collections::HashSet;

use crate::crypto::{Digest32, KeyPair};
use crate::error::LedgerError;
use crate::state::LedgerState;

use super::block::{Block, Receipt, TxStatus};
use super::exec::{apply_transaction, BlockContext, TxEffect};
use super::genesis::Genesis;
use super::tx::SignedTransaction;
use super::{BlockRejection, ChainError};

#[derive(Debug, Clone)]
pub struct Node {
    genesis: Genesis,
    state: LedgerState,
    blocks: Vec<Block>,
    key: Option<KeyPair>,
    mempool: Vec<SignedTransaction>,
}

/// Runs `txs` against `state` in order, producing one receipt per tx.
pub fn execute_block_txs(
    state: &mut LedgerState,
    txs: &[SignedTransaction],
    ctx: &BlockContext,
) -> Vec<Receipt> {
    txs.iter()
        .map(|tx| {
            let tx_hash = tx.hash();
            match apply_transaction(state, tx, ctx) {
                Ok(_) => Receipt {
                    tx_hash,
                    status: TxStatus::Applied,
                    reason: None,
                },
                Err(e) => Receipt {
                    tx_hash,
                    status: TxStatus::Rejected,
                    reason: Some(e.code().to_string()),
                },
            }
        })
        .collect()
}

impl Node {
    /// A node at genesis. Without a key it is an observer: it validates and
    /// replays but never proposes.
    pub fn new(genesis: Genesis, key: Option<KeyPair>) -> Result<Node, ChainError> {
        let state = genesis.initial_state()?;
        let block0 = genesis.genesis_block()?;
        Ok(Node {
            genesis,
            state,
            blocks: vec![block0],
            key,
            mempool: Vec::new(),
        })
    }

    pub fn genesis(&self) -> &Genesis {
        &self.genesis
    }

    pub fn state(&self) -> &LedgerState {
        &self.state
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn tip(&self) -> &Block {
        self.blocks.last().expect("genesis block always present")
    }

    pub fn height(&self) -> u64 {
        self.tip().height
    }

    pub fn genesis_hash(&self) -> Digest32 {
        self.blocks[0].hash()
    }

    pub fn key(&self) -> Option<&KeyPair> {
        self.key.as_ref()
    }

    /// Attaches or drops the proposing key, e.g. after rebuilding a node
    /// from its log.
    pub fn set_key(&mut self, key: Option<KeyPair>) {
        self.key = key;
    }

    pub fn is_my_turn(&self) -> bool {
        match &self.key {
            Some(k) => self.genesis.proposer_for(self.height() + 1) == k.address(),
            None => false,
        }
    }

    pub fn mempool(&self) -> &[SignedTransaction] {
        &self.mempool
    }

    pub fn submit(&mut self, tx: SignedTransaction) {
        self.mempool.push(tx);
    }

    pub fn context_for(&self, block_time: u64, proposer: crate::crypto::Address) -> BlockContext {
        BlockContext {
            block_time,
            proposer,
            fee: self.genesis.fee,
        }
    }

    /// Dry-runs `tx` on top of the current state plus everything already
    /// queued, at the given block time.
    pub fn dry_run(&self, tx: &SignedTransaction, block_time: u64) -> Result<TxEffect, LedgerError> {
        let proposer = self.genesis.proposer_for(self.height() + 1);
        let ctx = self.context_for(block_time, proposer);
        let mut scratch = self.state.clone();
        for queued in &self.mempool {
            let _ = apply_transaction(&mut scratch, queued, &ctx);
        }
        apply_transaction(&mut scratch, tx, &ctx)
    }

    /// Builds and signs the next block from the whole mempool, in
    /// submission order. The block is not appended; pass it to
    /// [`Node::validate_and_append`] like any other block.
    pub fn propose_block(&mut self, block_time: u64) -> Result<Block, ChainError> {
        let key = self.key.as_ref().ok_or(ChainError::NoValidatorKey)?;
        let height = self.height() + 1;
        if self.genesis.proposer_for(height) != key.address() {
            return Err(ChainError::NotMyTurn {
                height,
                expected: self.genesis.proposer_for(height),
            });
        }
        let block_time = block_time.max(self.tip().block_time);
        let txs = std::mem::take(&mut self.mempool);
        let ctx = self.context_for(block_time, key.address());
        let mut scratch = self.state.clone();
        let receipts = execute_block_txs(&mut scratch, &txs, &ctx);
        let mut block = Block {
            height,
            prev_hash: self.tip().hash(),
            block_time,
            txs,
            receipts,
            proposer: key.address(),
            state_root: scratch.state_root(),
            proposer_signature: None,
        };
        block.sign(key);
        Ok(block)
    }

    /// Full check of `block` against the local tip; on success the block
    /// is appended and the state advances.
    pub fn validate_and_append(&mut self, block: Block) -> Result<(), BlockRejection> {
        let tip = self.tip();
        if block.height != tip.height + 1 {
            return Err(BlockRejection::BadLinkage(format!(
                "height {} does not follow {}",
                block.height, tip.height
            )));
        }
        if block.prev_hash != tip.hash() {
            return Err(BlockRejection::BadLinkage(format!(
                "prev_hash {} is not the tip hash",
                block.prev_hash
            )));
        }
        if block.proposer != self.genesis.proposer_for(block.height) {
            return Err(BlockRejection::WrongProposer);
        }
        let sig_ok = block
            .proposer_signature
            .is_some_and(|s| crate::crypto::verify(&block.signing_digest(), &s, &block.proposer));
        if !sig_ok {
            return Err(BlockRejection::BadProposerSig);
        }
        if block.block_time < tip.block_time {
            return Err(BlockRejection::BadTimestamp);
        }
        if block.receipts.len() != block.txs.len() {
            return Err(BlockRejection::ReceiptMismatch);
        }

        let ctx = self.context_for(block.block_time, block.proposer);
        let mut next = self.state.clone();
        let receipts = execute_block_txs(&mut next, &block.txs, &ctx);
        if next.state_root() != block.state_root {
            return Err(BlockRejection::StateRootMismatch);
        }
        if receipts != block.receipts {
            return Err(BlockRejection::ReceiptMismatch);
        }

        let included: HashSet<Digest32> = block.receipts.iter().map(|r| r.tx_hash).collect();
        self.mempool.retain(|tx| !included.contains(&tx.hash()));
        self.state = next;
        self.blocks.push(block);
        Ok(())
    }

    /// Ledger-wide invariants that must hold after every block.
    pub fn check_invariants(&self) -> Result<(), String> {
        if !self.state.tokens.is_conserved() {
            return Err(format!(
                "balances sum to {} but {} were minted",
                self.state.tokens.sum_balances(),
                self.state.tokens.total_minted
            ));
        }
        if self.state.state_root() != self.tip().state_root {
            return Err("live state diverges from the tip state_root".into());
        }
        Ok(())
    }
}
