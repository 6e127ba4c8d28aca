//! Crypto toolkit: fixed algorithm choices, uniform error type, byte-exact
//! serialization. Group operations use ristretto255; symmetric primitives are
//! AES-256-CTR (PRG), AES-256-GCM (AEAD) and HMAC-SHA256 (PRF).

pub mod aead;
pub mod elgamal;
pub mod group;
pub mod hash;
pub mod prf;
pub mod prg;
pub mod shamir;
pub mod sig;

mod seed;

pub use hash::{group_to_seed, hash_to_group};
pub use seed::Seed;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CryptoError {
    #[error("invalid group element encoding")]
    GroupEncoding,
    #[error("invalid scalar encoding")]
    ScalarEncoding,
    #[error("scalar is zero where a nonzero value is required")]
    ZeroScalar,
    #[error("plaintext is the identity element")]
    IdentityPlaintext,
    #[error("ciphertext is malformed: {0}")]
    Malformed(&'static str),
    #[error("AEAD authentication failed")]
    AeadAuth,
    #[error("AEAD round tag mismatch: expected {expected}, got {got}")]
    AeadRound { expected: u64, got: u64 },
    #[error("signature verification failed")]
    BadSignature,
    #[error("invalid signature or key encoding")]
    SigEncoding,
    #[error("need at least {need} distinct shares, got {got}")]
    NotEnoughShares { need: usize, got: usize },
    #[error("duplicate share index {0}")]
    DuplicateShareIndex(u32),
    #[error("share index 0 is reserved for the secret")]
    ZeroShareIndex,
    #[error("threshold {ell} must be below the share count {count}")]
    BadThreshold { ell: u32, count: u32 },
}
