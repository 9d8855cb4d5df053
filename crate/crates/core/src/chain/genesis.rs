use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::canonical::{canonical_hash, dec_u64};
use crate::crypto::{Address, Digest32};
use crate::stamps::{default_stamps, StampParam};
use crate::state::LedgerState;
use crate::token::TokenAmount;

use super::block::Block;
use super::ChainError;

/// Off-chain role labels used by the audit tooling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Authority,
    Bank,
    User,
    Validator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeePolicy {
    pub enabled: bool,
    /// Flat fee per applied transaction, paid to the block proposer.
    pub amount: TokenAmount,
}

impl Default for FeePolicy {
    fn default() -> Self {
        FeePolicy {
            enabled: false,
            amount: TokenAmount::ZERO,
        }
    }
}

impl FeePolicy {
    pub fn effective(&self) -> TokenAmount {
        if self.enabled {
            self.amount
        } else {
            TokenAmount::ZERO
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Allocation {
    pub address: Address,
    pub amount: TokenAmount,
}

/// The height-0 configuration. Fixed for the life of the chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Genesis {
    pub chain_id: String,
    #[serde(with = "dec_u64")]
    pub genesis_time: u64,
    pub owner: Address,
    pub validators: Vec<Address>,
    #[serde(default)]
    pub allocations: Vec<Allocation>,
    #[serde(default = "default_stamps")]
    pub stamps: Vec<StampParam>,
    #[serde(default)]
    pub fee: FeePolicy,
    #[serde(default)]
    pub roles: BTreeMap<Address, Role>,
}

impl Genesis {
    pub fn validate(&self) -> Result<(), ChainError> {
        if self.validators.is_empty() {
            return Err(ChainError::InvalidGenesis("validator set is empty".into()));
        }
        let unique: BTreeSet<_> = self.validators.iter().collect();
        if unique.len() != self.validators.len() {
            return Err(ChainError::InvalidGenesis("duplicate validator".into()));
        }
        if self.owner.is_zero() || self.validators.iter().any(Address::is_zero) {
            return Err(ChainError::InvalidGenesis(
                "the zero address cannot hold a role".into(),
            ));
        }
        if self.fee.enabled && self.fee.amount.is_zero() {
            return Err(ChainError::InvalidGenesis(
                "fee enabled with zero amount".into(),
            ));
        }
        Ok(())
    }

    /// Post-genesis state: allocations minted by the owner, stamps seeded.
    pub fn initial_state(&self) -> Result<LedgerState, ChainError> {
        self.validate()?;
        let mut state = LedgerState::new(self.owner);
        for a in &self.allocations {
            state
                .tokens
                .mint(&self.owner, &a.address, a.amount)
                .map_err(|e| ChainError::InvalidGenesis(format!("allocation to {}: {e}", a.address)))?;
        }
        for s in &self.stamps {
            state
                .stamps
                .add(&self.owner, &self.owner, s.clone())
                .map_err(|e| ChainError::InvalidGenesis(format!("stamp {}: {e}", s.stamp_code)))?;
        }
        Ok(state)
    }

    pub fn config_hash(&self) -> Digest32 {
        canonical_hash(self)
    }

    pub fn genesis_block(&self) -> Result<Block, ChainError> {
        let state = self.initial_state()?;
        Ok(Block {
            height: 0,
            prev_hash: self.config_hash(),
            block_time: self.genesis_time,
            txs: Vec::new(),
            receipts: Vec::new(),
            proposer: self.validators[0],
            state_root: state.state_root(),
            proposer_signature: None,
        })
    }

    pub fn proposer_for(&self, height: u64) -> Address {
        self.validators[(height % self.validators.len() as u64) as usize]
    }

    /// Role of an address. The owner and the zero address are fixed;
    /// anything unlabeled counts as a user.
    pub fn role_of(&self, addr: &Address) -> Option<Role> {
        if *addr == self.owner {
            return Some(Role::Authority);
        }
        self.roles.get(addr).copied()
    }
}
