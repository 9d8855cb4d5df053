//! Deterministic transaction execution.

use crate::crypto::Address;
use crate::error::LedgerError;
use crate::payment::{self, PayParam, PaymentRequest};
use crate::state::LedgerState;
use crate::token::TokenAmount;

use super::genesis::FeePolicy;
use super::tx::{SignedTransaction, TransactionPayload};

/// Client timestamps on payments may differ from block time by at most this.
pub const PAYMENT_TIME_WINDOW_SECS: u64 = 300;

/// Block-level inputs to execution.
#[derive(Debug, Clone, Copy)]
pub struct BlockContext {
    pub block_time: u64,
    pub proposer: Address,
    pub fee: FeePolicy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TxEffect {
    None,
    Payment(Box<PayParam>),
}

/// Applies one signed transaction. On error `state` is left exactly as it
/// was: no balance, registry entry or nonce changes.
pub fn apply_transaction(
    state: &mut LedgerState,
    tx: &SignedTransaction,
    ctx: &BlockContext,
) -> Result<TxEffect, LedgerError> {
    if !tx.signature_valid() {
        return Err(LedgerError::BadSignature);
    }
    if tx.nonce != state.nonce_of(&tx.sender) {
        return Err(LedgerError::BadNonce);
    }

    let owner = state.owner();
    let fee = if tx.sender == owner {
        TokenAmount::ZERO
    } else {
        ctx.fee.effective()
    };
    if !fee.is_zero() {
        let cost = spend_of(state, &tx.payload);
        let needed = cost.checked_add(fee)?;
        if state.tokens.balance_of(&tx.sender) < needed {
            return Err(LedgerError::InsufficientBalance);
        }
    }

    let sender = tx.sender;
    let effect = match &tx.payload {
        TransactionPayload::Mint { to, amount } => {
            state.tokens.mint(&sender, to, *amount)?;
            TxEffect::None
        }
        TransactionPayload::Transfer { to, amount } => {
            state.tokens.transfer(&sender, to, *amount)?;
            TxEffect::None
        }
        TransactionPayload::Burn { amount } => {
            crate::audit::audit_and_burn(state, &sender, *amount)?;
            TxEffect::None
        }
        TransactionPayload::AddStamp { stamp } => {
            state.stamps.add(&sender, &owner, stamp.clone())?;
            TxEffect::None
        }
        TransactionPayload::UpdateStamp { stamp_code, update } => {
            state.stamps.update(&sender, &owner, stamp_code, update)?;
            TxEffect::None
        }
        TransactionPayload::PayStampDuty {
            doc_hash,
            stamp_code,
            bloom_filter,
            time_stamp,
            payer_signature,
        } => {
            if time_stamp.abs_diff(ctx.block_time) > PAYMENT_TIME_WINDOW_SECS {
                return Err(LedgerError::TimestampOutOfWindow);
            }
            let record = payment::pay_stamp_duty(
                state,
                PaymentRequest {
                    payer: sender,
                    doc_hash: *doc_hash,
                    stamp_code: stamp_code.clone(),
                    bloom_filter: bloom_filter.clone(),
                    time_stamp: *time_stamp,
                    payer_signature: *payer_signature,
                },
            )?;
            TxEffect::Payment(Box::new(record))
        }
    };

    if !fee.is_zero() {
        // Sufficiency was checked up front, so this cannot fail.
        state
            .tokens
            .move_tokens(&sender, &ctx.proposer, fee)
            .expect("fee covered by pre-check");
    }
    *state.nonces.entry(sender).or_insert(0) += 1;
    Ok(effect)
}

/// Tokens the payload itself takes from the sender.
fn spend_of(state: &LedgerState, payload: &TransactionPayload) -> TokenAmount {
    match payload {
        TransactionPayload::Transfer { amount, .. } => *amount,
        TransactionPayload::PayStampDuty { stamp_code, .. } => state
            .stamps
            .get(stamp_code)
            .map(|s| s.stamp_price)
            .unwrap_or_default(),
        _ => TokenAmount::ZERO,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::genesis::{Allocation, Genesis};
    use crate::crypto::{hash256, keygen, KeyPair};
    use crate::content::{BloomFilter, BloomFilterParams};
    use crate::stamps::default_stamps;

    fn key(n: u8) -> KeyPair {
        keygen(Some([n; 32])).unwrap()
    }

    fn setup(fee: FeePolicy) -> (LedgerState, BlockContext, KeyPair, KeyPair, KeyPair) {
        let owner = key(1);
        let bank = key(2);
        let user = key(3);
        let validator = key(4);
        let genesis = Genesis {
            chain_id: "test".into(),
            genesis_time: 1_000,
            owner: owner.address(),
            validators: vec![validator.address()],
            allocations: vec![Allocation {
                address: bank.address(),
                amount: TokenAmount(10_000),
            }],
            stamps: default_stamps(),
            fee,
            roles: Default::default(),
        };
        let ctx = BlockContext {
            block_time: 2_000,
            proposer: validator.address(),
            fee,
        };
        (genesis.initial_state().unwrap(), ctx, owner, bank, user)
    }

    #[test]
    fn owner_mint_applies() {
        let (mut s, ctx, owner, bank, _) = setup(FeePolicy::default());
        let tx = SignedTransaction::sign(
            &owner,
            0,
            TransactionPayload::Mint {
                to: bank.address(),
                amount: TokenAmount(5),
            },
        );
        apply_transaction(&mut s, &tx, &ctx).unwrap();
        assert_eq!(s.tokens.balance_of(&bank.address()), TokenAmount(10_005));
        assert_eq!(s.nonce_of(&owner.address()), 1);
    }

    #[test]
    fn replay_rejected_without_change() {
        let (mut s, ctx, _, bank, user) = setup(FeePolicy::default());
        let tx = SignedTransaction::sign(
            &bank,
            0,
            TransactionPayload::Transfer {
                to: user.address(),
                amount: TokenAmount(10),
            },
        );
        apply_transaction(&mut s, &tx, &ctx).unwrap();
        let before = s.clone();
        assert_eq!(apply_transaction(&mut s, &tx, &ctx), Err(LedgerError::BadNonce));
        assert_eq!(s, before);
    }

    #[test]
    fn inner_failure_is_atomic() {
        let (mut s, ctx, _, bank, user) = setup(FeePolicy::default());
        let before = s.to_canonical_json();
        let tx = SignedTransaction::sign(
            &bank,
            0,
            TransactionPayload::Transfer {
                to: user.address(),
                amount: TokenAmount(10_001),
            },
        );
        assert_eq!(
            apply_transaction(&mut s, &tx, &ctx),
            Err(LedgerError::InsufficientBalance)
        );
        assert_eq!(s.to_canonical_json(), before);
    }

    #[test]
    fn tampered_signature_rejected() {
        let (mut s, ctx, _, bank, user) = setup(FeePolicy::default());
        let mut tx = SignedTransaction::sign(
            &bank,
            0,
            TransactionPayload::Transfer {
                to: user.address(),
                amount: TokenAmount(1),
            },
        );
        tx.payload = TransactionPayload::Transfer {
            to: user.address(),
            amount: TokenAmount(2),
        };
        assert_eq!(apply_transaction(&mut s, &tx, &ctx), Err(LedgerError::BadSignature));
    }

    #[test]
    fn fee_goes_to_proposer() {
        let fee = FeePolicy {
            enabled: true,
            amount: TokenAmount(1),
        };
        let (mut s, ctx, _, bank, user) = setup(fee);
        let tx = SignedTransaction::sign(
            &bank,
            0,
            TransactionPayload::Transfer {
                to: user.address(),
                amount: TokenAmount(9_999),
            },
        );
        apply_transaction(&mut s, &tx, &ctx).unwrap();
        assert_eq!(s.tokens.balance_of(&bank.address()), TokenAmount(0));
        assert_eq!(s.tokens.balance_of(&ctx.proposer), TokenAmount(1));
        assert!(s.tokens.is_conserved());

        // Price plus fee must be covered.
        let tx = SignedTransaction::sign(
            &user,
            0,
            TransactionPayload::Transfer {
                to: bank.address(),
                amount: TokenAmount(9_999),
            },
        );
        let before = s.clone();
        assert_eq!(
            apply_transaction(&mut s, &tx, &ctx),
            Err(LedgerError::InsufficientBalance)
        );
        assert_eq!(s, before);
    }

    #[test]
    fn payment_time_window() {
        let (mut s, ctx, _, bank, _) = setup(FeePolicy::default());
        let doc_hash = hash256(b"doc");
        let pay = |t: u64, nonce: u64| {
            SignedTransaction::sign(
                &bank,
                nonce,
                TransactionPayload::PayStampDuty {
                    doc_hash,
                    stamp_code: "M3000".into(),
                    bloom_filter: BloomFilter::empty(BloomFilterParams::DEFAULT),
                    time_stamp: t,
                    payer_signature: bank.sign(&doc_hash),
                },
            )
        };
        assert_eq!(
            apply_transaction(&mut s, &pay(ctx.block_time + 301, 0), &ctx),
            Err(LedgerError::TimestampOutOfWindow)
        );
        assert_eq!(
            apply_transaction(&mut s, &pay(ctx.block_time - 301, 0), &ctx),
            Err(LedgerError::TimestampOutOfWindow)
        );
        let eff = apply_transaction(&mut s, &pay(ctx.block_time + 300, 0), &ctx).unwrap();
        assert!(matches!(eff, TxEffect::Payment(_)));
        apply_transaction(&mut s, &pay(ctx.block_time - 300, 1), &ctx).unwrap();
    }
}
