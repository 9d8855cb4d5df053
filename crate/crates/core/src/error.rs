use thiserror::Error;

/// Errors raised by state transitions. `code()` is the stable identifier used
/// in transaction receipts, API responses and CLI output.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("caller is not the token owner")]
    NotOwner,
    #[error("amount must be positive")]
    ZeroAmount,
    #[error("arithmetic overflow")]
    Overflow,
    #[error("insufficient balance")]
    InsufficientBalance,
    #[error("the authority may only send tokens to the zero address")]
    AuthorityRecirculation,
    #[error("stamp code already registered")]
    DuplicateStampCode,
    #[error("unknown stamp code")]
    UnknownStampCode,
    #[error("stamp price must be positive")]
    ZeroPrice,
    #[error("stamp is not active")]
    InactiveStamp,
    #[error("stamp code longer than 65535 bytes")]
    StampCodeTooLong,
    #[error("signature does not verify")]
    BadSignature,
    #[error("pay code already recorded")]
    DuplicatePayCode,
    #[error("unknown pay code")]
    UnknownPayCode,
    #[error("payment timestamp too far from block time")]
    TimestampOutOfWindow,
    #[error("nonce does not match the sender's transaction count")]
    BadNonce,
}

impl LedgerError {
    pub fn code(&self) -> &'static str {
        match self {
            LedgerError::NotOwner => "NotOwner",
            LedgerError::ZeroAmount => "ZeroAmount",
            LedgerError::Overflow => "Overflow",
            LedgerError::InsufficientBalance => "InsufficientBalance",
            LedgerError::AuthorityRecirculation => "AuthorityRecirculation",
            LedgerError::DuplicateStampCode => "DuplicateStampCode",
            LedgerError::UnknownStampCode => "UnknownStampCode",
            LedgerError::ZeroPrice => "ZeroPrice",
            LedgerError::InactiveStamp => "InactiveStamp",
            LedgerError::StampCodeTooLong => "StampCodeTooLong",
            LedgerError::BadSignature => "BadSignature",
            LedgerError::DuplicatePayCode => "DuplicatePayCode",
            LedgerError::UnknownPayCode => "UnknownPayCode",
            LedgerError::TimestampOutOfWindow => "TimestampOutOfWindow",
            LedgerError::BadNonce => "BadNonce",
        }
    }

    pub fn from_code(code: &str) -> Option<LedgerError> {
        use LedgerError::*;
        [
            NotOwner,
            ZeroAmount,
            Overflow,
            InsufficientBalance,
            AuthorityRecirculation,
            DuplicateStampCode,
            UnknownStampCode,
            ZeroPrice,
            InactiveStamp,
            StampCodeTooLong,
            BadSignature,
            DuplicatePayCode,
            UnknownPayCode,
            TimestampOutOfWindow,
            BadNonce,
        ]
        .into_iter()
        .find(|e| e.code() == code)
    }
}
