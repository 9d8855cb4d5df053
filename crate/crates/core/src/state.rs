use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::canonical::{self, canonical_hash};
use crate::crypto::{Address, Digest32};
use crate::payment::PaymentRegistry;
use crate::stamps::StampRegistry;
use crate::token::TokenState;

/// Everything the consortium replicates. Two nodes agree iff their
/// canonical serializations of this value are byte-identical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerState {
    pub tokens: TokenState,
    pub stamps: StampRegistry,
    pub payments: PaymentRegistry,
    /// Applied-transaction count per sender. Absent means zero.
    #[serde(with = "nonce_map")]
    pub nonces: BTreeMap<Address, u64>,
}

impl LedgerState {
    pub fn new(owner: Address) -> Self {
        LedgerState {
            tokens: TokenState::new(owner),
            stamps: StampRegistry::default(),
            payments: PaymentRegistry::default(),
            nonces: BTreeMap::new(),
        }
    }

    pub fn owner(&self) -> Address {
        self.tokens.owner
    }

    pub fn nonce_of(&self, addr: &Address) -> u64 {
        self.nonces.get(addr).copied().unwrap_or(0)
    }

    pub fn to_canonical_json(&self) -> String {
        canonical::to_canonical_json(self)
    }

    pub fn state_root(&self) -> Digest32 {
        canonical_hash(self)
    }
}

mod nonce_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::crypto::Address;

    pub fn serialize<S: Serializer>(m: &BTreeMap<Address, u64>, s: S) -> Result<S::Ok, S::Error> {
        let as_str: BTreeMap<&Address, String> = m.iter().map(|(k, v)| (k, v.to_string())).collect();
        as_str.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Address, u64>, D::Error> {
        let raw = BTreeMap::<Address, String>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| {
                crate::canonical::dec_u64::parse(&v)
                    .map(|n| (k, n))
                    .map_err(serde::de::Error::custom)
            })
            .collect()
    }
}
