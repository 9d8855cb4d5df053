//! Smart stamp duty on a permissioned ledger.
//!
//! Stamp duty is paid in SSD tokens (1 token = 1 Rupiah). The Tax Authority
//! mints tokens to banks, banks sell them to taxpayers, and a taxpayer pays
//! duty on a document by recording its hash, a Bloom filter of its words
//! and a signature. Anyone can later check that a document was stamped, and
//! check a printed copy's words against the recorded filter. Collected
//! tokens are burned to the zero address once audited.
//!
//! The ledger is replicated by a fixed set of validators that take turns
//! proposing blocks; see [`chain`].

pub mod audit;
pub mod canonical;
pub mod chain;
pub mod content;
pub mod crypto;
pub mod error;
pub mod payment;
pub mod sim;
pub mod stamps;
pub mod state;
pub mod token;

pub use crypto::{Address, Digest32, KeyPair, Signature};
pub use error::LedgerError;
pub use state::LedgerState;
pub use token::TokenAmount;
