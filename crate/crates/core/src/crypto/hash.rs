//! Hashing between byte strings, the group, and seeds.
//!
//! `hash_to_group` is a random-oracle map (SHA-512 → uniform-bytes point
//! derivation); `group_to_seed` hashes the canonical encoding back down to a
//! λ-bit seed. Pairwise mask seeds make a full trip through the group this
//! way: seed → point (ElGamal plaintext) → seed, with both endpoints of the
//! protocol hashing the same point to the same seed.

use sha2::{Digest, Sha256, Sha512};

use super::group::GroupElement;
use super::Seed;
use curve25519_dalek::ristretto::RistrettoPoint;

/// Domain-separated hash onto the group.
pub fn hash_to_group(domain: &str, input: &[u8]) -> GroupElement {
    let mut hasher = Sha512::new();
    hasher.update(domain.as_bytes());
    hasher.update([0u8]);
    hasher.update(input);
    let wide: [u8; 64] = hasher.finalize().into();
    GroupElement(RistrettoPoint::from_uniform_bytes(&wide))
}

/// λ-bit seed from a group element: SHA-256 of the canonical encoding.
pub fn group_to_seed(e: &GroupElement) -> Seed {
    let digest = Sha256::digest(e.to_bytes());
    Seed::from_bytes(digest.into())
}

/// The Pedersen commitment base `h`: a nothing-up-my-sleeve point whose
/// discrete log relative to `g` nobody knows.
pub fn pedersen_h() -> &'static GroupElement {
    static H: std::sync::OnceLock<GroupElement> = std::sync::OnceLock::new();
    H.get_or_init(|| hash_to_group("aggsum/pedersen-h", b""))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn deterministic_and_domain_separated() {
        let a = hash_to_group("d1", b"x");
        assert_eq!(a, hash_to_group("d1", b"x"));
        assert_ne!(a, hash_to_group("d2", b"x"));
        // The separator byte keeps (domain, input) framing unambiguous.
        assert_ne!(hash_to_group("ab", b"c"), hash_to_group("a", b"bc"));
    }

    #[test]
    fn no_collisions_over_ten_thousand_inputs() {
        let mut seen = HashSet::new();
        for i in 0u32..10_000 {
            let p = hash_to_group("collision-scan", &i.to_be_bytes());
            assert!(seen.insert(p.to_bytes()), "collision at input {i}");
            assert!(!p.is_identity());
        }
    }

    #[test]
    fn group_to_seed_is_stable_across_the_encode_decode_boundary() {
        let p = hash_to_group("t", b"seed material");
        let q = GroupElement::from_bytes(&p.to_bytes()).unwrap();
        assert_eq!(group_to_seed(&p), group_to_seed(&q));
    }

    #[test]
    fn pedersen_base_is_not_degenerate() {
        let h = pedersen_h();
        assert!(!h.is_identity());
        assert_ne!(*h, GroupElement::generator());
    }
}
