use serde::{Deserialize, Serialize};

use crate::canonical::{canonical_hash, dec_u64};
use crate::content::BloomFilter;
use crate::crypto::{Address, Digest32, KeyPair, Signature};
use crate::stamps::{StampParam, StampUpdate};
use crate::token::TokenAmount;

/// The state transition a transaction asks for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransactionPayload {
    Mint {
        to: Address,
        amount: TokenAmount,
    },
    Transfer {
        to: Address,
        amount: TokenAmount,
    },
    Burn {
        amount: TokenAmount,
    },
    AddStamp {
        stamp: StampParam,
    },
    UpdateStamp {
        stamp_code: String,
        update: StampUpdate,
    },
    PayStampDuty {
        doc_hash: Digest32,
        stamp_code: String,
        bloom_filter: BloomFilter,
        #[serde(with = "dec_u64")]
        time_stamp: u64,
        payer_signature: Signature,
    },
}

impl TransactionPayload {
    pub fn kind(&self) -> &'static str {
        match self {
            TransactionPayload::Mint { .. } => "mint",
            TransactionPayload::Transfer { .. } => "transfer",
            TransactionPayload::Burn { .. } => "burn",
            TransactionPayload::AddStamp { .. } => "add_stamp",
            TransactionPayload::UpdateStamp { .. } => "update_stamp",
            TransactionPayload::PayStampDuty { .. } => "pay_stamp_duty",
        }
    }
}

#[derive(Serialize)]
struct UnsignedTransaction<'a> {
    sender: &'a Address,
    #[serde(with = "dec_u64")]
    nonce: u64,
    payload: &'a TransactionPayload,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignedTransaction {
    pub sender: Address,
    #[serde(with = "dec_u64")]
    pub nonce: u64,
    pub payload: TransactionPayload,
    pub tx_signature: Signature,
}

impl SignedTransaction {
    pub fn sign(key: &KeyPair, nonce: u64, payload: TransactionPayload) -> Self {
        let sender = key.address();
        let digest = signing_digest(&sender, nonce, &payload);
        SignedTransaction {
            sender,
            nonce,
            payload,
            tx_signature: key.sign(&digest),
        }
    }

    /// What the sender signs: the hash of `{nonce, payload, sender}`.
    pub fn signing_digest(&self) -> Digest32 {
        signing_digest(&self.sender, self.nonce, &self.payload)
    }

    pub fn signature_valid(&self) -> bool {
        crate::crypto::verify(&self.signing_digest(), &self.tx_signature, &self.sender)
    }

    pub fn hash(&self) -> Digest32 {
        canonical_hash(self)
    }
}

fn signing_digest(sender: &Address, nonce: u64, payload: &TransactionPayload) -> Digest32 {
    canonical_hash(&UnsignedTransaction {
        sender,
        nonce,
        payload,
    })
}
