//! Chaum–Pedersen discrete-log-equality proofs for partial decryptions.
//!
//! A decryptor holding share s proves log_g(y1) = log_{c0}(y2) for its
//! registered y1 = g^s and the partial y2 = c0^s it hands the server, making
//! a garbage partial attributable instead of silently corrupting the sum.
//! Non-interactive via Fiat–Shamir: commitments (g^β, c0^β) travel with the
//! response z = s·e + β, and the verifier recomputes the challenge e.

use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha512};

use crate::crypto::group::{GroupElement, Scalar};

const DOMAIN: &str = "aggsum/dleq-v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DleqProof {
    /// g^β
    pub commit_g: GroupElement,
    /// c0^β
    pub commit_c0: GroupElement,
    /// z = s·e + β
    pub z: Scalar,
}

fn challenge(
    c0: &GroupElement,
    y1: &GroupElement,
    y2: &GroupElement,
    commit_g: &GroupElement,
    commit_c0: &GroupElement,
) -> Scalar {
    let mut hasher = Sha512::new();
    hasher.update(DOMAIN.as_bytes());
    hasher.update([0u8]);
    hasher.update(GroupElement::generator().to_bytes());
    hasher.update(c0.to_bytes());
    hasher.update(y1.to_bytes());
    hasher.update(y2.to_bytes());
    hasher.update(commit_g.to_bytes());
    hasher.update(commit_c0.to_bytes());
    let wide: [u8; 64] = hasher.finalize().into();
    Scalar::from_wide_bytes(&wide)
}

/// Prove that y1 = g^s and y2 = c0^s share the exponent `s`.
pub fn prove<R: RngCore + CryptoRng>(
    s: &Scalar,
    c0: &GroupElement,
    y1: &GroupElement,
    y2: &GroupElement,
    rng: &mut R,
) -> DleqProof {
    let beta = Scalar::random_nonzero(rng);
    let commit_g = GroupElement::mul_base(&beta);
    let commit_c0 = c0 * &beta;
    let e = challenge(c0, y1, y2, &commit_g, &commit_c0);
    DleqProof {
        commit_g,
        commit_c0,
        z: *s * e + beta,
    }
}

/// Check g^z = y1^e·g^β and c0^z = y2^e·c0^β under the recomputed challenge.
pub fn verify(
    proof: &DleqProof,
    c0: &GroupElement,
    y1: &GroupElement,
    y2: &GroupElement,
) -> bool {
    let e = challenge(c0, y1, y2, &proof.commit_g, &proof.commit_c0);
    let g_ok = GroupElement::mul_base(&proof.z) == y1 * &e + proof.commit_g;
    let c0_ok = c0 * &proof.z == y2 * &e + proof.commit_c0;
    g_ok && c0_ok
}

/// 96-byte wire form: commit_g ∥ commit_c0 ∥ z.
impl DleqProof {
    pub fn to_bytes(&self) -> [u8; 96] {
        let mut out = [0u8; 96];
        out[..32].copy_from_slice(&self.commit_g.to_bytes());
        out[32..64].copy_from_slice(&self.commit_c0.to_bytes());
        out[64..].copy_from_slice(&self.z.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8; 96]) -> Result<Self, crate::crypto::CryptoError> {
        Ok(DleqProof {
            commit_g: GroupElement::from_bytes(bytes[..32].try_into().expect("32"))?,
            commit_c0: GroupElement::from_bytes(bytes[32..64].try_into().expect("32"))?,
            z: Scalar::from_bytes(bytes[64..].try_into().expect("32"))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup(rng: &mut ChaCha20Rng) -> (Scalar, GroupElement, GroupElement, GroupElement) {
        let s = Scalar::random_nonzero(rng);
        let c0 = GroupElement::mul_base(&Scalar::random_nonzero(rng));
        let y1 = GroupElement::mul_base(&s);
        let y2 = &c0 * &s;
        (s, c0, y1, y2)
    }

    #[test]
    fn honest_proof_verifies() {
        let mut rng = ChaCha20Rng::seed_from_u64(71);
        let (s, c0, y1, y2) = setup(&mut rng);
        let proof = prove(&s, &c0, &y1, &y2, &mut rng);
        assert!(verify(&proof, &c0, &y1, &y2));
    }

    #[test]
    fn tampered_partial_fails() {
        let mut rng = ChaCha20Rng::seed_from_u64(72);
        let (s, c0, y1, y2) = setup(&mut rng);
        let proof = prove(&s, &c0, &y1, &y2, &mut rng);
        let bad_partial = y2 + GroupElement::generator();
        assert!(!verify(&proof, &c0, &y1, &bad_partial));
    }

    #[test]
    fn proof_is_bound_to_the_ciphertext() {
        let mut rng = ChaCha20Rng::seed_from_u64(73);
        let (s, c0, y1, _) = setup(&mut rng);
        let y2 = &c0 * &s;
        let proof = prove(&s, &c0, &y1, &y2, &mut rng);
        let other_c0 = GroupElement::mul_base(&Scalar::random_nonzero(&mut rng));
        let other_y2 = &other_c0 * &s;
        // Honest values for a different c0 don't fit the old proof.
        assert!(!verify(&proof, &other_c0, &y1, &other_y2));
    }

    #[test]
    fn wrong_exponent_cannot_prove() {
        let mut rng = ChaCha20Rng::seed_from_u64(74);
        let (s, c0, y1, y2) = setup(&mut rng);
        let wrong = s + Scalar::one();
        let forged = prove(&wrong, &c0, &y1, &y2, &mut rng);
        assert!(!verify(&forged, &c0, &y1, &y2));
    }

    #[test]
    fn serialization_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(75);
        let (s, c0, y1, y2) = setup(&mut rng);
        let proof = prove(&s, &c0, &y1, &y2, &mut rng);
        let back = DleqProof::from_bytes(&proof.to_bytes()).unwrap();
        assert_eq!(back, proof);
        assert!(verify(&back, &c0, &y1, &y2));
    }
}
