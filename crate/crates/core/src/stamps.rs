//! Owner-maintained table of stamp types.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::crypto::Address;
use crate::error::LedgerError;
use crate::token::TokenAmount;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StampParam {
    pub stamp_code: String,
    pub stamp_name: String,
    pub stamp_price: TokenAmount,
    pub regulation_reference: String,
    pub is_active: bool,
}

impl StampParam {
    pub fn new(code: &str, name: &str, price: u64, reference: &str) -> Self {
        StampParam {
            stamp_code: code.to_string(),
            stamp_name: name.to_string(),
            stamp_price: TokenAmount(price),
            regulation_reference: reference.to_string(),
            is_active: true,
        }
    }
}

/// The two denominations in circulation when the registry is seeded.
pub fn default_stamps() -> Vec<StampParam> {
    vec![
        StampParam::new("M3000", "Rp3000", 3000, "UU 13/1985"),
        StampParam::new("M6000", "Rp6000", 6000, "UU 13/1985"),
    ]
}

/// Field changes for [`StampRegistry::update`]. `None` leaves a field as is.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StampUpdate {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price: Option<TokenAmount>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StampRegistry {
    stamps: BTreeMap<String, StampParam>,
}

impl StampRegistry {
    pub fn add(
        &mut self,
        caller: &Address,
        owner: &Address,
        param: StampParam,
    ) -> Result<(), LedgerError> {
        if caller != owner {
            return Err(LedgerError::NotOwner);
        }
        if param.stamp_code.len() > u16::MAX as usize {
            return Err(LedgerError::StampCodeTooLong);
        }
        if self.stamps.contains_key(&param.stamp_code) {
            return Err(LedgerError::DuplicateStampCode);
        }
        if param.stamp_price.is_zero() {
            return Err(LedgerError::ZeroPrice);
        }
        self.stamps.insert(param.stamp_code.clone(), param);
        Ok(())
    }

    pub fn update(
        &mut self,
        caller: &Address,
        owner: &Address,
        stamp_code: &str,
        update: &StampUpdate,
    ) -> Result<(), LedgerError> {
        if caller != owner {
            return Err(LedgerError::NotOwner);
        }
        let stamp = self
            .stamps
            .get_mut(stamp_code)
            .ok_or(LedgerError::UnknownStampCode)?;
        if update.price.is_some_and(|p| p.is_zero()) {
            return Err(LedgerError::ZeroPrice);
        }
        if let Some(price) = update.price {
            stamp.stamp_price = price;
        }
        if let Some(active) = update.active {
            stamp.is_active = active;
        }
        if let Some(reference) = &update.reference {
            stamp.regulation_reference = reference.clone();
        }
        Ok(())
    }

    pub fn get(&self, stamp_code: &str) -> Result<&StampParam, LedgerError> {
        self.stamps
            .get(stamp_code)
            .ok_or(LedgerError::UnknownStampCode)
    }

    pub fn iter(&self) -> impl Iterator<Item = &StampParam> {
        self.stamps.values()
    }

    pub fn len(&self) -> usize {
        self.stamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stamps.is_empty()
    }
}
