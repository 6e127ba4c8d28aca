//! Verifiable secret sharing: Pedersen commitments for the dealing phase
//! (perfectly hiding, so nothing about SK leaks before the reveal), Feldman
//! commitments for the public-key phase (binding shares to g^{secret}).
//!
//! Dealer: polynomials p (the secret one) and p' (the blinder), both degree
//! ℓ; recipient j gets (p(j), p'(j)); commitments C_k = g^{a_k}·h^{b_k} over
//! the coefficients. PVerify checks g^{s_j}·h^{s'_j} = Π C_k^{j^k}; FVerify
//! checks g^{s_j} = Π A_k^{j^k} with A_k = g^{a_k}.

use rand::{CryptoRng, RngCore};

use crate::crypto::group::{GroupElement, Scalar};
use crate::crypto::hash::pedersen_h;
use crate::crypto::shamir::Polynomial;
use crate::crypto::CryptoError;

/// Share of one dealer's secret for recipient `index`, with the blinder.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PedersenShare {
    pub index: u32,
    pub value: Scalar,
    pub blind: Scalar,
}

/// Everything a dealer produces in one dealing. Feldman commitments stay
/// local until the public-key phase; the polynomials stay local for
/// answering complaints.
#[derive(Clone)]
pub struct Dealing {
    pub shares: Vec<PedersenShare>,
    pub commitments: Vec<GroupElement>,
    pub feldman: Vec<GroupElement>,
    pub poly: Polynomial,
    pub blind_poly: Polynomial,
}

pub fn deal<R: RngCore + CryptoRng>(
    secret: Scalar,
    ell: u32,
    count: u32,
    rng: &mut R,
) -> Result<Dealing, CryptoError> {
    if ell >= count {
        return Err(CryptoError::BadThreshold { ell, count });
    }
    let poly = Polynomial::random_with_secret(secret, ell, rng);
    let blind_poly = Polynomial::random_with_secret(Scalar::random(rng), ell, rng);
    let h = pedersen_h();
    let commitments: Vec<GroupElement> = poly
        .coeffs()
        .iter()
        .zip(blind_poly.coeffs())
        .map(|(a, b)| GroupElement::vartime_double_base(b, h, a))
        .collect();
    let feldman: Vec<GroupElement> = poly.coeffs().iter().map(GroupElement::mul_base).collect();
    let shares = (1..=count)
        .map(|j| PedersenShare {
            index: j,
            value: poly.eval(j),
            blind: blind_poly.eval(j),
        })
        .collect();
    Ok(Dealing {
        shares,
        commitments,
        feldman,
        poly,
        blind_poly,
    })
}

/// Powers 1, j, j², … j^ℓ as scalars.
pub(crate) fn index_powers(index: u32, len: usize) -> Vec<Scalar> {
    let x = Scalar::from_u64(index as u64);
    let mut powers = Vec::with_capacity(len);
    let mut acc = Scalar::one();
    for _ in 0..len {
        powers.push(acc);
        acc = acc * x;
    }
    powers
}

/// Pedersen check: commitment-consistency of a share pair.
pub fn pedersen_verify(share: &PedersenShare, commitments: &[GroupElement]) -> bool {
    if commitments.is_empty() || share.index == 0 {
        return false;
    }
    let lhs = GroupElement::vartime_double_base(&share.blind, pedersen_h(), &share.value);
    let rhs = GroupElement::vartime_msm(
        &index_powers(share.index, commitments.len()),
        commitments,
    );
    lhs == rhs
}

/// The committed polynomial evaluated in the exponent: g^{p(index)}.
pub fn feldman_eval(index: u32, feldman: &[GroupElement]) -> GroupElement {
    GroupElement::vartime_msm(&index_powers(index, feldman.len()), feldman)
}

/// Feldman check: the share lies on the polynomial committed in the exponent.
pub fn feldman_verify(index: u32, value: &Scalar, feldman: &[GroupElement]) -> bool {
    if feldman.is_empty() || index == 0 {
        return false;
    }
    let lhs = GroupElement::mul_base(value);
    let rhs = GroupElement::vartime_msm(&index_powers(index, feldman.len()), feldman);
    lhs == rhs
}
