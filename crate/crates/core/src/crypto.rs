//! Keccak-256 hashing, secp256k1 keys, recoverable signatures and
//! Ethereum-style address derivation.
//!
//! Every other module hashes and signs through here. All functions are pure.

use std::fmt;
use std::str::FromStr;

use k256::ecdsa::{RecoveryId, Signature as EcdsaSignature, SigningKey, VerifyingKey};
use k256::elliptic_curve::ops::Reduce;
use k256::{PublicKey, Scalar, U256};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha3::{Digest as _, Keccak256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("seed reduces to the zero scalar")]
    ZeroSeed,
    #[error("invalid private key")]
    InvalidPrivateKey,
    #[error("public key is not a point on secp256k1")]
    InvalidPublicKey,
    #[error("invalid hex: {0}")]
    InvalidHex(String),
}

/// Parses `0x`-prefixed lowercase hex of an exact length.
///
/// Uppercase digits are rejected so every value has exactly one textual form.
pub fn decode_hex_exact(s: &str, len: usize) -> Result<Vec<u8>, CryptoError> {
    let body = s
        .strip_prefix("0x")
        .ok_or_else(|| CryptoError::InvalidHex(format!("missing 0x prefix in {s:?}")))?;
    if body.len() != len * 2 {
        return Err(CryptoError::InvalidHex(format!(
            "expected {} hex digits, got {}",
            len * 2,
            body.len()
        )));
    }
    if body.bytes().any(|b| b.is_ascii_uppercase()) {
        return Err(CryptoError::InvalidHex("uppercase hex digits".into()));
    }
    hex::decode(body).map_err(|e| CryptoError::InvalidHex(e.to_string()))
}

pub fn encode_hex(bytes: &[u8]) -> String {
    format!("0x{}", hex::encode(bytes))
}

macro_rules! hex_newtype {
    ($name:ident, $len:expr) => {
        impl $name {
            pub const LEN: usize = $len;

            pub fn as_bytes(&self) -> &[u8; $len] {
                &self.0
            }

            pub fn to_hex(&self) -> String {
                encode_hex(&self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.to_hex())
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), self.to_hex())
            }
        }

        impl FromStr for $name {
            type Err = CryptoError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let bytes = decode_hex_exact(s, $len)?;
                let mut out = [0u8; $len];
                out.copy_from_slice(&bytes);
                Ok(Self(out))
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(&self.to_hex())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

/// A 32-byte Keccak-256 output.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Digest32(pub [u8; 32]);
hex_newtype!(Digest32, 32);

/// A 20-byte account identifier.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Address(pub [u8; 20]);
hex_newtype!(Address, 20);

impl Address {
    /// The burn address. Nobody holds its private key.
    pub const ZERO: Address = Address([0u8; 20]);

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }
}

/// Recoverable ECDSA signature, rendered as 65 bytes `r || s || recovery_id`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub r: [u8; 32],
    pub s: [u8; 32],
    pub recovery_id: u8,
}

impl Signature {
    pub fn to_bytes(&self) -> [u8; 65] {
        let mut out = [0u8; 65];
        out[..32].copy_from_slice(&self.r);
        out[32..64].copy_from_slice(&self.s);
        out[64] = self.recovery_id;
        out
    }

    pub fn from_bytes(bytes: &[u8; 65]) -> Self {
        let mut r = [0u8; 32];
        let mut s = [0u8; 32];
        r.copy_from_slice(&bytes[..32]);
        s.copy_from_slice(&bytes[32..64]);
        Signature {
            r,
            s,
            recovery_id: bytes[64],
        }
    }

    pub fn to_hex(&self) -> String {
        encode_hex(&self.to_bytes())
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({})", self.to_hex())
    }
}

impl FromStr for Signature {
    type Err = CryptoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = decode_hex_exact(s, 65)?;
        let mut arr = [0u8; 65];
        arr.copy_from_slice(&bytes);
        Ok(Signature::from_bytes(&arr))
    }
}

impl Serialize for Signature {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A secp256k1 key pair. The public half is kept as the 64-byte `x || y`.
#[derive(Clone)]
pub struct KeyPair {
    signing: SigningKey,
    public_key: [u8; 64],
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("address", &self.address())
            .finish_non_exhaustive()
    }
}

impl KeyPair {
    pub fn from_private_key(bytes: &[u8; 32]) -> Result<Self, CryptoError> {
        let signing =
            SigningKey::from_bytes(bytes.into()).map_err(|_| CryptoError::InvalidPrivateKey)?;
        Ok(Self::from_signing_key(signing))
    }

    fn from_signing_key(signing: SigningKey) -> Self {
        let point = signing.verifying_key().to_encoded_point(false);
        let mut public_key = [0u8; 64];
        public_key.copy_from_slice(&point.as_bytes()[1..]);
        KeyPair {
            signing,
            public_key,
        }
    }

    pub fn private_key(&self) -> [u8; 32] {
        self.signing.to_bytes().into()
    }

    pub fn public_key(&self) -> &[u8; 64] {
        &self.public_key
    }

    pub fn address(&self) -> Address {
        address_of_point(&self.public_key)
    }

    pub fn sign(&self, digest: &Digest32) -> Signature {
        sign_with(&self.signing, digest)
    }
}

pub fn hash256(data: &[u8]) -> Digest32 {
    Digest32(Keccak256::digest(data).into())
}

/// Hashes the concatenation of several byte slices without allocating.
pub fn hash256_parts(parts: &[&[u8]]) -> Digest32 {
    let mut hasher = Keccak256::new();
    for part in parts {
        hasher.update(part);
    }
    Digest32(hasher.finalize().into())
}

/// Generates a key pair. A seed is reduced modulo the curve order; without
/// one the key is drawn from the OS RNG.
pub fn keygen(seed: Option<[u8; 32]>) -> Result<KeyPair, CryptoError> {
    match seed {
        Some(seed) => {
            let scalar = <Scalar as Reduce<U256>>::reduce_bytes(&seed.into());
            if bool::from(scalar.is_zero()) {
                return Err(CryptoError::ZeroSeed);
            }
            let bytes: [u8; 32] = scalar.to_bytes().into();
            KeyPair::from_private_key(&bytes)
        }
        None => Ok(KeyPair::from_signing_key(SigningKey::random(
            &mut rand::rngs::OsRng,
        ))),
    }
}

/// Address of a 64-byte uncompressed public key: the last 20 bytes of its hash.
pub fn derive_address(public_key: &[u8; 64]) -> Result<Address, CryptoError> {
    let mut sec1 = [0u8; 65];
    sec1[0] = 0x04;
    sec1[1..].copy_from_slice(public_key);
    PublicKey::from_sec1_bytes(&sec1).map_err(|_| CryptoError::InvalidPublicKey)?;
    Ok(address_of_point(public_key))
}

fn address_of_point(public_key: &[u8; 64]) -> Address {
    let h = hash256(public_key);
    let mut out = [0u8; 20];
    out.copy_from_slice(&h.0[12..]);
    Address(out)
}

/// Signs a digest with RFC 6979 nonces; the result is low-s normalized.
pub fn sign(digest: &Digest32, private_key: &[u8; 32]) -> Result<Signature, CryptoError> {
    let signing =
        SigningKey::from_bytes(private_key.into()).map_err(|_| CryptoError::InvalidPrivateKey)?;
    Ok(sign_with(&signing, digest))
}

fn sign_with(signing: &SigningKey, digest: &Digest32) -> Signature {
    // k256 normalizes s and adjusts the recovery id accordingly.
    let (sig, recid) = signing
        .sign_prehash_recoverable(&digest.0)
        .expect("prehash of 32 bytes is always signable");
    let bytes = sig.to_bytes();
    let mut r = [0u8; 32];
    let mut s = [0u8; 32];
    r.copy_from_slice(&bytes[..32]);
    s.copy_from_slice(&bytes[32..]);
    Signature {
        r,
        s,
        recovery_id: recid.to_byte(),
    }
}

/// Recovers the signer's public key. Returns `None` for anything malformed,
/// including high-s signatures and recovery ids outside {0, 1}.
pub fn recover(digest: &Digest32, sig: &Signature) -> Option<[u8; 64]> {
    if sig.recovery_id > 1 {
        return None;
    }
    let mut rs = [0u8; 64];
    rs[..32].copy_from_slice(&sig.r);
    rs[32..].copy_from_slice(&sig.s);
    let ecdsa = EcdsaSignature::from_slice(&rs).ok()?;
    if ecdsa.normalize_s().is_some() {
        return None;
    }
    let recid = RecoveryId::from_byte(sig.recovery_id)?;
    let vk = VerifyingKey::recover_from_prehash(&digest.0, &ecdsa, recid).ok()?;
    let point = vk.to_encoded_point(false);
    let mut out = [0u8; 64];
    out.copy_from_slice(&point.as_bytes()[1..]);
    Some(out)
}

pub fn verify(digest: &Digest32, sig: &Signature, signer: &Address) -> bool {
    match recover(digest, sig) {
        Some(pk) => address_of_point(&pk) == *signer,
        None => false,
    }
}
