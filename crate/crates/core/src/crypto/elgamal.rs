//! ElGamal over the group, with threshold decryption.
//!
//! The committee key SK is Shamir-shared; nobody holds it whole. A ciphertext
//! (c0, c1) = (g^w, m·PK^w) is opened by combining ℓ+1 partial decryptions
//! c0^{s_u} with Lagrange coefficients: Π (c0^{s_u})^{β_u} = c0^{SK}, and
//! m = c1 / c0^{SK}. Plaintexts are group elements (mask seeds ride in as
//! hashed-to-group points), and the identity is rejected as a plaintext.

use rand::{CryptoRng, RngCore};

use super::group::{FixedBaseTable, GroupElement, Scalar};
use super::shamir::{lagrange_at_zero, Share};
use super::CryptoError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    pub c0: GroupElement,
    pub c1: GroupElement,
}

impl Ciphertext {
    /// `c0 ∥ c1`, 64 bytes.
    pub fn to_bytes(&self) -> [u8; 64] {
        let mut out = [0u8; 64];
        out[..32].copy_from_slice(&self.c0.to_bytes());
        out[32..].copy_from_slice(&self.c1.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8; 64]) -> Result<Self, CryptoError> {
        Ok(Ciphertext {
            c0: GroupElement::from_bytes(bytes[..32].try_into().expect("32 bytes"))?,
            c1: GroupElement::from_bytes(bytes[32..].try_into().expect("32 bytes"))?,
        })
    }
}

/// Partial decryption `c0^{s_u}` from the decryptor at share index `index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartialDecryption {
    pub index: u32,
    pub value: GroupElement,
}

/// Fresh keypair; the secret is guaranteed nonzero.
pub fn keygen<R: RngCore + CryptoRng>(rng: &mut R) -> (Scalar, GroupElement) {
    let sk = Scalar::random_nonzero(rng);
    (sk, GroupElement::mul_base(&sk))
}

/// Encrypt with a precomputed table for the public key — the round hot path
/// encrypts hundreds of seeds under the same committee key.
pub fn encrypt_with_table<R: RngCore + CryptoRng>(
    pk: &FixedBaseTable,
    msg: &GroupElement,
    rng: &mut R,
) -> Result<Ciphertext, CryptoError> {
    if msg.is_identity() {
        return Err(CryptoError::IdentityPlaintext);
    }
    let w = Scalar::random_nonzero(rng);
    Ok(Ciphertext {
        c0: GroupElement::mul_base(&w),
        c1: *msg + pk.mul(&w),
    })
}

pub fn encrypt<R: RngCore + CryptoRng>(
    pk: &GroupElement,
    msg: &GroupElement,
    rng: &mut R,
) -> Result<Ciphertext, CryptoError> {
    if msg.is_identity() {
        return Err(CryptoError::IdentityPlaintext);
    }
    let w = Scalar::random_nonzero(rng);
    Ok(Ciphertext {
        c0: GroupElement::mul_base(&w),
        c1: *msg + pk * &w,
    })
}

/// Non-threshold decryption; used by tests as the oracle for the threshold path.
pub fn decrypt(sk: &Scalar, ct: &Ciphertext) -> GroupElement {
    ct.c1 - &ct.c0 * sk
}

pub fn partial_decrypt(share: &Share, c0: &GroupElement) -> PartialDecryption {
    PartialDecryption {
        index: share.index,
        value: c0 * &share.value,
    }
}

/// Combine partials into `c0^{SK}`. Sorts by index and uses exactly the first
/// ℓ+1 — supplying more partials never changes the result.
pub fn threshold_combine(
    partials: &[PartialDecryption],
    ell: u32,
) -> Result<GroupElement, CryptoError> {
    let need = ell as usize + 1;
    if partials.len() < need {
        return Err(CryptoError::NotEnoughShares {
            need,
            got: partials.len(),
        });
    }
    let mut sorted = partials.to_vec();
    sorted.sort_by_key(|p| p.index);
    let used = &sorted[..need];
    let betas = lagrange_at_zero(&used.iter().map(|p| p.index).collect::<Vec<_>>())?;
    let values: Vec<GroupElement> = used.iter().map(|p| p.value).collect();
    Ok(GroupElement::vartime_msm(&betas, &values))
}

/// Same combine with externally computed β — the server derives one β set for
/// its chosen decryptor subset and reuses it across every ciphertext.
pub fn combine_with_betas(betas: &[Scalar], values: &[GroupElement]) -> GroupElement {
    GroupElement::vartime_msm(betas, values)
}

/// Recover the plaintext given `c0^{SK}`.
pub fn unblind(ct: &Ciphertext, c0_sk: &GroupElement) -> GroupElement {
    ct.c1 - *c0_sk
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::shamir;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn random_msg(rng: &mut ChaCha20Rng) -> GroupElement {
        GroupElement::mul_base(&Scalar::random_nonzero(rng))
    }

    #[test]
    fn roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        let (sk, pk) = keygen(&mut rng);
        let msg = random_msg(&mut rng);
        let ct = encrypt(&pk, &msg, &mut rng).unwrap();
        assert_eq!(decrypt(&sk, &ct), msg);
        // Table-based encryption is the same scheme.
        let table = FixedBaseTable::new(&pk);
        let ct2 = encrypt_with_table(&table, &msg, &mut rng).unwrap();
        assert_eq!(decrypt(&sk, &ct2), msg);
    }

    #[test]
    fn identity_plaintext_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(32);
        let (_, pk) = keygen(&mut rng);
        assert_eq!(
            encrypt(&pk, &GroupElement::identity(), &mut rng),
            Err(CryptoError::IdentityPlaintext)
        );
    }

    #[test]
    fn serialization_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(33);
        let (_, pk) = keygen(&mut rng);
        let ct = encrypt(&pk, &random_msg(&mut rng), &mut rng).unwrap();
        assert_eq!(Ciphertext::from_bytes(&ct.to_bytes()).unwrap(), ct);
        let mut bad = ct.to_bytes();
        bad[0] ^= 0xff;
        assert!(Ciphertext::from_bytes(&bad).is_err());
    }

    #[test]
    fn threshold_equals_direct_decryption() {
        let mut rng = ChaCha20Rng::seed_from_u64(34);
        let (sk, pk) = keygen(&mut rng);
        let ell = 2;
        let shares = shamir::share(&sk, ell, 3 * ell + 1, &mut rng).unwrap();
        let msg = random_msg(&mut rng);
        let ct = encrypt(&pk, &msg, &mut rng).unwrap();
        let partials: Vec<PartialDecryption> =
            shares.iter().map(|s| partial_decrypt(s, &ct.c0)).collect();
        let c0_sk = threshold_combine(&partials, ell).unwrap();
        assert_eq!(c0_sk, &ct.c0 * &sk);
        assert_eq!(unblind(&ct, &c0_sk), msg);
        assert_eq!(unblind(&ct, &c0_sk), decrypt(&sk, &ct));
    }

    #[test]
    fn extra_partials_do_not_change_the_result() {
        let mut rng = ChaCha20Rng::seed_from_u64(35);
        let (sk, pk) = keygen(&mut rng);
        let shares = shamir::share(&sk, 1, 4, &mut rng).unwrap();
        let ct = encrypt(&pk, &random_msg(&mut rng), &mut rng).unwrap();
        let mut partials: Vec<PartialDecryption> =
            shares.iter().map(|s| partial_decrypt(s, &ct.c0)).collect();
        let from_two = threshold_combine(&partials[..2], 1).unwrap();
        // A corrupted partial beyond the first ℓ+1 sorted entries is ignored.
        partials[3].value = GroupElement::mul_base(&Scalar::from_u64(99));
        assert_eq!(threshold_combine(&partials, 1).unwrap(), from_two);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn any_partial_subset_opens(seed in any::<u64>(), skip in 0usize..4) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let (sk, pk) = keygen(&mut rng);
            let ell = 1;
            let shares = shamir::share(&sk, ell, 4, &mut rng).unwrap();
            let msg = GroupElement::mul_base(&Scalar::random_nonzero(&mut rng));
            let ct = encrypt(&pk, &msg, &mut rng).unwrap();
            let partials: Vec<PartialDecryption> = shares
                .iter()
                .cycle()
                .skip(skip)
                .take(2)
                .map(|s| partial_decrypt(s, &ct.c0))
                .collect();
            let c0_sk = threshold_combine(&partials, ell).unwrap();
            prop_assert_eq!(unblind(&ct, &c0_sk), msg);
        }
    }
}
