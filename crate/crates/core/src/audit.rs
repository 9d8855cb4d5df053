//! Bank reports, reconciliation against the chain, token accounting and the
//! post-audit burn.
//!
//! A bank's "sales" are its applied outbound transfers to user addresses
//! (anything not labeled authority, bank or validator, and not the zero
//! address). Reports are signed by the bank so that any edit after signing,
//! including a change to the period, is caught even when the edited figures
//! happen to agree with the chain.

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::canonical::{canonical_hash, dec_u64};
use crate::chain::{Block, Genesis, Role, TransactionPayload};
use crate::crypto::{self, Address, Digest32, KeyPair, Signature};
use crate::error::LedgerError;
use crate::state::LedgerState;
use crate::token::TokenAmount;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("period start {start} is after end {end}")]
    InvalidPeriod { start: u64, end: u64 },
}

impl AuditError {
    pub fn code(&self) -> &'static str {
        match self {
            AuditError::InvalidPeriod { .. } => "InvalidPeriod",
        }
    }
}

/// Inclusive `[start, end]` in Unix seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Period {
    #[serde(with = "dec_u64")]
    pub start: u64,
    #[serde(with = "dec_u64")]
    pub end: u64,
}

impl Period {
    pub fn new(start: u64, end: u64) -> Result<Period, AuditError> {
        let p = Period { start, end };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<(), AuditError> {
        if self.start > self.end {
            return Err(AuditError::InvalidPeriod {
                start: self.start,
                end: self.end,
            });
        }
        Ok(())
    }

    pub fn contains(&self, t: u64) -> bool {
        (self.start..=self.end).contains(&t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankReport {
    pub bank: Address,
    pub period: Period,
    pub reported_tokens_sold: TokenAmount,
    #[serde(with = "dec_u64")]
    pub tx_count: u64,
}

impl BankReport {
    pub fn digest(&self) -> Digest32 {
        canonical_hash(self)
    }

    pub fn sign(self, key: &KeyPair) -> SignedBankReport {
        let bank_signature = key.sign(&self.digest());
        SignedBankReport {
            report: self,
            bank_signature,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignedBankReport {
    pub report: BankReport,
    pub bank_signature: Signature,
}

/// Role of `addr` as the audit sees it. Unlabeled addresses are users.
pub fn classify(genesis: &Genesis, addr: &Address) -> Role {
    genesis.role_of(addr).unwrap_or(Role::User)
}

fn is_sale(genesis: &Genesis, bank: &Address, sender: &Address, to: &Address) -> bool {
    sender == bank && !to.is_zero() && classify(genesis, to) == Role::User
}

/// Sums what the chain says `bank` sold within `period`.
fn chain_sales(genesis: &Genesis, bank: &Address, period: &Period, blocks: &[Block]) -> (u64, u64) {
    let mut total: u64 = 0;
    let mut count = 0;
    for block in blocks.iter().filter(|b| period.contains(b.block_time)) {
        for tx in block.applied() {
            if let TransactionPayload::Transfer { to, amount } = &tx.payload {
                if is_sale(genesis, bank, &tx.sender, to) {
                    // Bounded by total supply, which is a u64.
                    total += amount.0;
                    count += 1;
                }
            }
        }
    }
    (total, count)
}

/// The report an honest bank would file, computed from its view of the chain.
pub fn generate_bank_report(
    genesis: &Genesis,
    bank: &Address,
    period: Period,
    blocks: &[Block],
) -> Result<BankReport, AuditError> {
    period.check()?;
    let (total, count) = chain_sales(genesis, bank, &period, blocks);
    Ok(BankReport {
        bank: *bank,
        period,
        reported_tokens_sold: TokenAmount(total),
        tx_count: count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MismatchReason {
    BadReportSignature,
    InvalidPeriod,
    TotalMismatch,
    TxCountMismatch,
}

impl MismatchReason {
    pub fn code(&self) -> &'static str {
        match self {
            MismatchReason::BadReportSignature => "BadReportSignature",
            MismatchReason::InvalidPeriod => "InvalidPeriod",
            MismatchReason::TotalMismatch => "TotalMismatch",
            MismatchReason::TxCountMismatch => "TxCountMismatch",
        }
    }
}

impl Serialize for MismatchReason {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reconciliation {
    pub matches: bool,
    pub chain_total: TokenAmount,
    #[serde(with = "dec_u64")]
    pub chain_tx_count: u64,
    /// `reported - chain`, negative when the bank under-reports.
    #[serde(serialize_with = "ser_i128")]
    pub delta: i128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<MismatchReason>,
}

fn ser_i128<S: Serializer>(v: &i128, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Recomputes the chain's figures for the report's bank and period and
/// compares them with what was reported.
pub fn reconcile(genesis: &Genesis, report: &BankReport, blocks: &[Block]) -> Reconciliation {
    if report.period.check().is_err() {
        return Reconciliation {
            matches: false,
            chain_total: TokenAmount::ZERO,
            chain_tx_count: 0,
            delta: 0,
            reason: Some(MismatchReason::InvalidPeriod),
        };
    }
    let (total, count) = chain_sales(genesis, &report.bank, &report.period, blocks);
    let delta = report.reported_tokens_sold.0 as i128 - total as i128;
    let reason = if delta != 0 {
        Some(MismatchReason::TotalMismatch)
    } else if count != report.tx_count {
        Some(MismatchReason::TxCountMismatch)
    } else {
        None
    };
    Reconciliation {
        matches: reason.is_none(),
        chain_total: TokenAmount(total),
        chain_tx_count: count,
        delta,
        reason,
    }
}

/// As [`reconcile`], after checking the bank's signature over the report.
pub fn reconcile_signed(
    genesis: &Genesis,
    signed: &SignedBankReport,
    blocks: &[Block],
) -> Reconciliation {
    let mut r = reconcile(genesis, &signed.report, blocks);
    if !crypto::verify(&signed.report.digest(), &signed.bank_signature, &signed.report.bank) {
        r.matches = false;
        r.reason = Some(MismatchReason::BadReportSignature);
    }
    r
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AccountingSummary {
    pub minted: TokenAmount,
    pub held_by_banks: TokenAmount,
    pub circulating_with_users: TokenAmount,
    pub collected_by_authority: TokenAmount,
    pub burned: TokenAmount,
    /// Addresses with a balance but no role label; counted as users.
    pub unlabeled: Vec<Address>,
}

impl AccountingSummary {
    /// `minted = banks + users + authority + burned`.
    pub fn identity_holds(&self) -> bool {
        self.minted.0 as u128
            == self.held_by_banks.0 as u128
                + self.circulating_with_users.0 as u128
                + self.collected_by_authority.0 as u128
                + self.burned.0 as u128
    }
}

/// Splits every balance by role. Validators and unlabeled addresses count
/// as users.
pub fn compute_accounting(genesis: &Genesis, state: &LedgerState) -> AccountingSummary {
    let mut banks = 0u64;
    let mut users = 0u64;
    let mut authority = 0u64;
    let mut unlabeled = Vec::new();
    for (addr, bal) in &state.tokens.balances {
        if addr.is_zero() {
            continue;
        }
        match genesis.role_of(addr) {
            Some(Role::Authority) => authority += bal.0,
            Some(Role::Bank) => banks += bal.0,
            Some(Role::User) | Some(Role::Validator) => users += bal.0,
            None => {
                if !bal.is_zero() {
                    unlabeled.push(*addr);
                }
                users += bal.0;
            }
        }
    }
    AccountingSummary {
        minted: state.tokens.total_minted,
        held_by_banks: TokenAmount(banks),
        circulating_with_users: TokenAmount(users),
        collected_by_authority: TokenAmount(authority),
        burned: state.tokens.burned(),
        unlabeled,
    }
}

/// Burns audited revenue: the owner's collected tokens go to the zero
/// address, where they stay countable but unspendable.
pub fn audit_and_burn(
    state: &mut LedgerState,
    caller: &Address,
    amount: TokenAmount,
) -> Result<(), LedgerError> {
    state.tokens.burn(caller, amount)
}
