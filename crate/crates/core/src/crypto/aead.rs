//! Authenticated encryption for decryptor-bound share envelopes: AES-256-GCM
//! with a random 96-bit nonce carried in front of the ciphertext. The round
//! number is appended to the plaintext before sealing, so a stale envelope
//! fails with a round mismatch rather than an authentication error — the two
//! are distinct conditions for callers.

use aes_gcm::aead::{Aead, Payload};
use aes_gcm::{Aes256Gcm, KeyInit, Nonce};
use rand::{CryptoRng, RngCore};

use super::{CryptoError, Seed};
use crate::Round;

const NONCE_LEN: usize = 12;

/// Symmetric key, usually derived from a DH seed.
#[derive(Clone)]
pub struct SymKey([u8; 32]);

impl SymKey {
    pub fn from_seed(seed: &Seed) -> Self {
        SymKey(*seed.as_bytes())
    }
}

/// Seal `payload ∥ t` under a fresh nonce; output is `nonce ∥ ciphertext`.
pub fn seal<R: RngCore + CryptoRng>(
    key: &SymKey,
    t: Round,
    payload: &[u8],
    rng: &mut R,
) -> Vec<u8> {
    let cipher = Aes256Gcm::new(key.0.as_slice().into());
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    let mut plaintext = Vec::with_capacity(payload.len() + 8);
    plaintext.extend_from_slice(payload);
    plaintext.extend_from_slice(&t.to_be_bytes());
    let ct = cipher
        .encrypt(
            Nonce::from_slice(&nonce),
            Payload {
                msg: &plaintext,
                aad: &[],
            },
        )
        .expect("GCM encryption is infallible for in-memory buffers");
    let mut out = Vec::with_capacity(NONCE_LEN + ct.len());
    out.extend_from_slice(&nonce);
    out.extend_from_slice(&ct);
    out
}

/// Open an envelope, insisting it was sealed for round `t`.
pub fn open(key: &SymKey, t: Round, bytes: &[u8]) -> Result<Vec<u8>, CryptoError> {
    if bytes.len() < NONCE_LEN {
        return Err(CryptoError::Malformed("envelope shorter than a nonce"));
    }
    let (nonce, ct) = bytes.split_at(NONCE_LEN);
    let cipher = Aes256Gcm::new(key.0.as_slice().into());
    let plaintext = cipher
        .decrypt(Nonce::from_slice(nonce), Payload { msg: ct, aad: &[] })
        .map_err(|_| CryptoError::AeadAuth)?;
    if plaintext.len() < 8 {
        return Err(CryptoError::Malformed("plaintext shorter than a round tag"));
    }
    let (payload, tag) = plaintext.split_at(plaintext.len() - 8);
    let got = u64::from_be_bytes(tag.try_into().expect("8 bytes"));
    if got != t {
        return Err(CryptoError::AeadRound {
            expected: t,
            got,
        });
    }
    Ok(payload.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn key(byte: u8) -> SymKey {
        SymKey::from_seed(&Seed::from_bytes([byte; 32]))
    }

    #[test]
    fn roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(41);
        let sealed = seal(&key(1), 7, b"share bytes", &mut rng);
        assert_eq!(open(&key(1), 7, &sealed).unwrap(), b"share bytes");
    }

    #[test]
    fn wrong_round_is_a_distinct_error() {
        let mut rng = ChaCha20Rng::seed_from_u64(42);
        let sealed = seal(&key(1), 7, b"x", &mut rng);
        assert_eq!(
            open(&key(1), 8, &sealed),
            Err(CryptoError::AeadRound {
                expected: 8,
                got: 7
            })
        );
    }

    #[test]
    fn wrong_key_fails_auth() {
        let mut rng = ChaCha20Rng::seed_from_u64(43);
        let sealed = seal(&key(1), 7, b"x", &mut rng);
        assert_eq!(open(&key(2), 7, &sealed), Err(CryptoError::AeadAuth));
    }

    #[test]
    fn truncated_envelope_is_malformed() {
        assert!(matches!(
            open(&key(1), 7, &[0u8; 5]),
            Err(CryptoError::Malformed(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // Any single bit flip anywhere in the envelope must be rejected.
        #[test]
        fn bit_flips_never_authenticate(seed in any::<u64>(), pos in 0usize..64, bit in 0u8..8) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let mut sealed = seal(&key(1), 7, b"thirty-two byte roundtrip body!!", &mut rng);
            let pos = pos % sealed.len();
            sealed[pos] ^= 1 << bit;
            prop_assert!(open(&key(1), 7, &sealed).is_err());
        }
    }
}
