//! The SSD token: balances, owner-only minting, transfers and burning.
//!
//! One token is one Rupiah. Burned tokens are parked at the zero address
//! instead of being destroyed, so `total_minted` never decreases and the
//! burned amount stays auditable.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::crypto::Address;
use crate::error::LedgerError;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TokenAmount(pub u64);

impl TokenAmount {
    pub const ZERO: TokenAmount = TokenAmount(0);

    pub fn checked_add(self, other: TokenAmount) -> Result<TokenAmount, LedgerError> {
        self.0
            .checked_add(other.0)
            .map(TokenAmount)
            .ok_or(LedgerError::Overflow)
    }

    pub fn checked_sub(self, other: TokenAmount) -> Option<TokenAmount> {
        self.0.checked_sub(other.0).map(TokenAmount)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for TokenAmount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for TokenAmount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for TokenAmount {
    fn from(v: u64) -> Self {
        TokenAmount(v)
    }
}

impl Serialize for TokenAmount {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        crate::canonical::dec_u64::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for TokenAmount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        crate::canonical::dec_u64::deserialize(d).map(TokenAmount)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenState {
    pub owner: Address,
    pub balances: BTreeMap<Address, TokenAmount>,
    pub total_minted: TokenAmount,
}

impl TokenState {
    pub fn new(owner: Address) -> Self {
        TokenState {
            owner,
            balances: BTreeMap::new(),
            total_minted: TokenAmount::ZERO,
        }
    }

    pub fn balance_of(&self, addr: &Address) -> TokenAmount {
        self.balances.get(addr).copied().unwrap_or_default()
    }

    pub fn burned(&self) -> TokenAmount {
        self.balance_of(&Address::ZERO)
    }

    pub fn mint(
        &mut self,
        caller: &Address,
        to: &Address,
        amount: TokenAmount,
    ) -> Result<(), LedgerError> {
        if *caller != self.owner {
            return Err(LedgerError::NotOwner);
        }
        if amount.is_zero() {
            return Err(LedgerError::ZeroAmount);
        }
        let total = self.total_minted.checked_add(amount)?;
        let bal = self.balance_of(to).checked_add(amount)?;
        self.total_minted = total;
        self.balances.insert(*to, bal);
        Ok(())
    }

    /// Moves tokens between accounts. The owner may only send to the zero
    /// address: collected duty is never recirculated.
    pub fn transfer(
        &mut self,
        from: &Address,
        to: &Address,
        amount: TokenAmount,
    ) -> Result<(), LedgerError> {
        if amount.is_zero() {
            return Err(LedgerError::ZeroAmount);
        }
        if *from == self.owner && !to.is_zero() {
            return Err(LedgerError::AuthorityRecirculation);
        }
        self.move_tokens(from, to, amount)
    }

    /// Unchecked-policy move used by transfer, burn and the payment path.
    pub(crate) fn move_tokens(
        &mut self,
        from: &Address,
        to: &Address,
        amount: TokenAmount,
    ) -> Result<(), LedgerError> {
        if from.is_zero() {
            // Burned tokens stay countable but are never spendable.
            return Err(LedgerError::InsufficientBalance);
        }
        let from_bal = self
            .balance_of(from)
            .checked_sub(amount)
            .ok_or(LedgerError::InsufficientBalance)?;
        if from == to {
            return Ok(());
        }
        let to_bal = self.balance_of(to).checked_add(amount)?;
        self.set_balance(from, from_bal);
        self.set_balance(to, to_bal);
        Ok(())
    }

    pub fn burn(&mut self, caller: &Address, amount: TokenAmount) -> Result<(), LedgerError> {
        if *caller != self.owner {
            return Err(LedgerError::NotOwner);
        }
        if amount.is_zero() {
            return Err(LedgerError::ZeroAmount);
        }
        let owner = self.owner;
        self.move_tokens(&owner, &Address::ZERO, amount)
    }

    fn set_balance(&mut self, addr: &Address, amount: TokenAmount) {
        if amount.is_zero() && !addr.is_zero() {
            self.balances.remove(addr);
        } else {
            self.balances.insert(*addr, amount);
        }
    }

    /// Sum of all balances, zero address included.
    pub fn sum_balances(&self) -> u128 {
        self.balances.values().map(|b| b.0 as u128).sum()
    }

    pub fn is_conserved(&self) -> bool {
        self.sum_balances() == self.total_minted.0 as u128
    }
}
