//! Stamp-duty payments: pay-code derivation, the payment registry and the
//! payment transition itself.

use std::collections::{BTreeMap, HashMap};

use chrono::DateTime;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::canonical::{self, dec_u64};
use crate::content::BloomFilter;
use crate::crypto::{self, hash256_parts, Address, Digest32, Signature};
use crate::error::LedgerError;
use crate::state::LedgerState;

/// `H(doc_hash || payer || len16(stamp_code) || stamp_code || be64(time_stamp))`.
///
/// The stamp code carries a two-byte big-endian length so that the preimage
/// is unambiguous.
pub fn compute_pay_code(
    doc_hash: &Digest32,
    payer: &Address,
    stamp_code: &str,
    time_stamp: u64,
) -> Result<Digest32, LedgerError> {
    let len: u16 = stamp_code
        .len()
        .try_into()
        .map_err(|_| LedgerError::StampCodeTooLong)?;
    Ok(hash256_parts(&[
        &doc_hash.0,
        &payer.0,
        &len.to_be_bytes(),
        stamp_code.as_bytes(),
        &time_stamp.to_be_bytes(),
    ]))
}

/// `YYYY-MM-DDTHH:MM:SSZ`, or `None` past chrono's representable range.
pub fn format_time_stamp(time_stamp: u64) -> Option<String> {
    let secs = i64::try_from(time_stamp).ok()?;
    let dt = DateTime::from_timestamp(secs, 0)?;
    Some(dt.format("%Y-%m-%dT%H:%M:%SZ").to_string())
}

pub fn parse_time_stamp(s: &str) -> Option<u64> {
    let dt = DateTime::parse_from_rfc3339(s).ok()?;
    u64::try_from(dt.timestamp()).ok()
}

/// One recorded stamp-duty payment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayParam {
    pub pay_code: Digest32,
    pub doc_hash: Digest32,
    #[serde(with = "dec_u64")]
    pub pay_index: u64,
    pub payer: Address,
    pub stamp_code: String,
    pub bloom_filter: BloomFilter,
    #[serde(with = "dec_u64")]
    pub time_stamp: u64,
    pub time_stamp_str: String,
    pub payer_signature: Signature,
}

impl PayParam {
    /// Checks every record-level invariant.
    pub fn check_invariants(&self) -> Result<(), String> {
        let code = compute_pay_code(&self.doc_hash, &self.payer, &self.stamp_code, self.time_stamp)
            .map_err(|e| e.to_string())?;
        if code != self.pay_code {
            return Err(format!("pay_code {} does not recompute (got {code})", self.pay_code));
        }
        if !crypto::verify(&self.doc_hash, &self.payer_signature, &self.payer) {
            return Err("payer signature does not verify".into());
        }
        if format_time_stamp(self.time_stamp).as_deref() != Some(self.time_stamp_str.as_str()) {
            return Err("time_stamp_str does not render time_stamp".into());
        }
        Ok(())
    }

    /// The canonical JSON receipt handed back to the payer.
    pub fn receipt_json(&self) -> String {
        canonical::to_canonical_json(self)
    }
}

/// What a payer submits. The chain fills in `pay_index` and the derived fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaymentRequest {
    pub payer: Address,
    pub doc_hash: Digest32,
    pub stamp_code: String,
    pub bloom_filter: BloomFilter,
    pub time_stamp: u64,
    pub payer_signature: Signature,
}

/// Payments in `pay_index` order with lookup indexes by pay code and by
/// document hash. Serializes as the plain ordered list.
#[derive(Debug, Clone, Default)]
pub struct PaymentRegistry {
    records: Vec<PayParam>,
    by_code: HashMap<Digest32, usize>,
    by_doc: BTreeMap<Digest32, Vec<usize>>,
}

impl PartialEq for PaymentRegistry {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
    }
}

impl Eq for PaymentRegistry {}

impl PaymentRegistry {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn next_index(&self) -> u64 {
        self.records.len() as u64
    }

    pub fn contains(&self, pay_code: &Digest32) -> bool {
        self.by_code.contains_key(pay_code)
    }

    pub fn get(&self, pay_code: &Digest32) -> Result<&PayParam, LedgerError> {
        self.by_code
            .get(pay_code)
            .map(|&i| &self.records[i])
            .ok_or(LedgerError::UnknownPayCode)
    }

    /// All payments of a document, ascending by `pay_index`.
    pub fn find_by_doc(&self, doc_hash: &Digest32) -> Vec<&PayParam> {
        self.by_doc
            .get(doc_hash)
            .map(|ix| ix.iter().map(|&i| &self.records[i]).collect())
            .unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PayParam> {
        self.records.iter()
    }

    fn push(&mut self, record: PayParam) {
        debug_assert_eq!(record.pay_index, self.records.len() as u64);
        let i = self.records.len();
        self.by_code.insert(record.pay_code, i);
        self.by_doc.entry(record.doc_hash).or_default().push(i);
        self.records.push(record);
    }
}

impl Serialize for PaymentRegistry {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.records.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PaymentRegistry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let records = Vec::<PayParam>::deserialize(d)?;
        let mut reg = PaymentRegistry::default();
        for (i, r) in records.into_iter().enumerate() {
            if r.pay_index != i as u64 {
                return Err(serde::de::Error::custom("pay_index sequence has a gap"));
            }
            if reg.contains(&r.pay_code) {
                return Err(serde::de::Error::custom("duplicate pay_code"));
            }
            reg.push(r);
        }
        Ok(reg)
    }
}

/// Records a payment: moves the stamp price from the payer to the owner
/// and appends the record under the next `pay_index`.
///
/// Every precondition is checked before anything is written, so on error
/// `state` is untouched.
pub fn pay_stamp_duty(
    state: &mut LedgerState,
    req: PaymentRequest,
) -> Result<PayParam, LedgerError> {
    let stamp = state.stamps.get(&req.stamp_code)?;
    if !stamp.is_active {
        return Err(LedgerError::InactiveStamp);
    }
    let price = stamp.stamp_price;
    if !crypto::verify(&req.doc_hash, &req.payer_signature, &req.payer) {
        return Err(LedgerError::BadSignature);
    }
    let pay_code = compute_pay_code(&req.doc_hash, &req.payer, &req.stamp_code, req.time_stamp)?;
    if state.payments.contains(&pay_code) {
        return Err(LedgerError::DuplicatePayCode);
    }
    let time_stamp_str =
        format_time_stamp(req.time_stamp).ok_or(LedgerError::TimestampOutOfWindow)?;
    if state.tokens.balance_of(&req.payer) < price {
        return Err(LedgerError::InsufficientBalance);
    }
    let owner = state.tokens.owner;
    if req.payer == owner {
        // Collected duty never leaves the owner except to be burned.
        return Err(LedgerError::AuthorityRecirculation);
    }
    state.tokens.move_tokens(&req.payer, &owner, price)?;

    let record = PayParam {
        pay_code,
        doc_hash: req.doc_hash,
        pay_index: state.payments.next_index(),
        payer: req.payer,
        stamp_code: req.stamp_code,
        bloom_filter: req.bloom_filter,
        time_stamp: req.time_stamp,
        time_stamp_str,
        payer_signature: req.payer_signature,
    };
    state.payments.push(record.clone());
    Ok(record)
}
