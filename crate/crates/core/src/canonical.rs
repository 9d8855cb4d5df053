//! Canonical JSON: object keys sorted bytewise, no insignificant whitespace,
//! UTF-8. Integers travel as decimal strings (see [`dec_u64`]), so every
//! number that appears in signed or hashed content is a JSON string.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::crypto::{hash256, Digest32};

#[derive(Debug, thiserror::Error)]
pub enum CanonicalError {
    #[error("malformed JSON: {0}")]
    Malformed(String),
    #[error("input is valid JSON but not in canonical form")]
    NotCanonical,
}

/// Serializes `value` canonically.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("domain types always serialize");
    let mut out = String::new();
    write_value(&v, &mut out);
    out
}

pub fn canonical_hash<T: Serialize + ?Sized>(value: &T) -> Digest32 {
    hash256(to_canonical_json(value).as_bytes())
}

/// Parses `text` and insists that it is byte-identical to the canonical
/// rendering of the parsed value.
pub fn from_canonical_json<T: Serialize + DeserializeOwned>(text: &str) -> Result<T, CanonicalError> {
    let value: T =
        serde_json::from_str(text).map_err(|e| CanonicalError::Malformed(e.to_string()))?;
    if to_canonical_json(&value) != text {
        return Err(CanonicalError::NotCanonical);
    }
    Ok(value)
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(&String, &Value)> = map.iter().collect();
            entries.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
            out.push('{');
            for (i, (k, val)) in entries.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("string key"));
                out.push(':');
                write_value(val, out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        other => out.push_str(&serde_json::to_string(other).expect("scalar")),
    }
}

/// `u64` as a decimal string. Leading zeros and signs are rejected.
pub mod dec_u64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }

    pub fn parse(s: &str) -> Result<u64, String> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("expected a decimal string, got {s:?}"));
        }
        if s.len() > 1 && s.starts_with('0') {
            return Err(format!("leading zero in {s:?}"));
        }
        s.parse().map_err(|_| format!("out of range: {s:?}"))
    }
}

pub mod dec_u64_opt {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_str(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|s| super::dec_u64::parse(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}
