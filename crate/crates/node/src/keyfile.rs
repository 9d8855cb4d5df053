//! Plaintext key files. Custody is the operator's problem; we only refuse
//! inconsistent files and complain about loose permissions.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use ssd_core::canonical::to_canonical_json;
use ssd_core::chain::Role;
use ssd_core::crypto::{decode_hex_exact, encode_hex, KeyPair};
use ssd_core::Address;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KeyFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}: not a key file: {1}")]
    Parse(String, String),
    #[error("{0}: private key is not 32 bytes of lowercase hex")]
    BadKey(String),
    #[error("{0}: stored address {1} does not match the private key")]
    AddressMismatch(String, Address),
}

impl KeyFileError {
    pub fn code(&self) -> &'static str {
        match self {
            KeyFileError::Io { .. } => "Io",
            KeyFileError::Parse(..) => "BadKeyFile",
            KeyFileError::BadKey(_) => "InvalidPrivateKey",
            KeyFileError::AddressMismatch(..) => "KeyAddressMismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyFile {
    pub address: Address,
    pub private_key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<Role>,
}

impl KeyFile {
    pub fn from_key(key: &KeyPair, role: Option<Role>) -> KeyFile {
        KeyFile {
            address: key.address(),
            private_key: encode_hex(&key.private_key()),
            role,
        }
    }

    pub fn key_pair(&self, origin: &str) -> Result<KeyPair, KeyFileError> {
        let raw = decode_hex_exact(&self.private_key, 32).map_err(|_| KeyFileError::BadKey(origin.into()))?;
        let mut sk = [0u8; 32];
        sk.copy_from_slice(&raw);
        let key = KeyPair::from_private_key(&sk).map_err(|_| KeyFileError::BadKey(origin.into()))?;
        if key.address() != self.address {
            return Err(KeyFileError::AddressMismatch(origin.into(), self.address));
        }
        Ok(key)
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(self)
    }
}

/// Loads a key file and returns the key pair, printing a warning to stderr
/// if the file is readable by group or others.
pub fn load(path: &Path) -> Result<(KeyFile, KeyPair), KeyFileError> {
    let origin = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| KeyFileError::Io {
        path: origin.clone(),
        source,
    })?;
    if let Some(warning) = permission_warning(path) {
        eprintln!("warning: {warning}");
    }
    let file: KeyFile =
        serde_json::from_str(&text).map_err(|e| KeyFileError::Parse(origin.clone(), e.to_string()))?;
    let key = file.key_pair(&origin)?;
    Ok((file, key))
}

/// Writes a key file readable only by its owner.
pub fn save(path: &Path, file: &KeyFile) -> Result<(), KeyFileError> {
    let io = |source| KeyFileError::Io {
        path: path.display().to_string(),
        source,
    };
    fs::write(path, file.to_json() + "\n").map_err(io)?;
    restrict(path).map_err(io)
}

#[cfg(unix)]
fn restrict(path: &Path) -> std::io::Result<()> {
    use std::os::unix::fs::PermissionsExt;
    fs::set_permissions(path, fs::Permissions::from_mode(0o600))
}

#[cfg(not(unix))]
fn restrict(_path: &Path) -> std::io::Result<()> {
    Ok(())
}

#[cfg(unix)]
pub fn permission_warning(path: &Path) -> Option<String> {
    use std::os::unix::fs::PermissionsExt;
    let mode = fs::metadata(path).ok()?.permissions().mode();
    (mode & 0o077 != 0).then(|| {
        format!(
            "key file {} has mode {:o}; it should not be accessible to group or others",
            path.display(),
            mode & 0o777
        )
    })
}

#[cfg(not(unix))]
pub fn permission_warning(_path: &Path) -> Option<String> {
    None
}
