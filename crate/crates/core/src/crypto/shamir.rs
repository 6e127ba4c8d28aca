//! Shamir secret sharing over the group's scalar field.
//!
//! Degree-ℓ polynomials, shares at x = 1..=count, secret at x = 0; any ℓ+1
//! distinct shares reconstruct. Reconstruction and Lagrange coefficients are
//! deterministic: shares are sorted by index and exactly the first ℓ+1 are
//! used, even when more are supplied.

use rand::{CryptoRng, RngCore};

use super::group::Scalar;
use super::CryptoError;

/// One party's share: the evaluation point (1-based) and the value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Share {
    pub index: u32,
    pub value: Scalar,
}

/// Degree-ℓ polynomial; coefficient 0 is the secret.
#[derive(Clone)]
pub struct Polynomial {
    coeffs: Vec<Scalar>,
}

impl Polynomial {
    pub fn random_with_secret<R: RngCore + CryptoRng>(
        secret: Scalar,
        ell: u32,
        rng: &mut R,
    ) -> Self {
        let mut coeffs = Vec::with_capacity(ell as usize + 1);
        coeffs.push(secret);
        coeffs.extend((0..ell).map(|_| Scalar::random(rng)));
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    /// Horner evaluation at x = `index`.
    pub fn eval(&self, index: u32) -> Scalar {
        let x = Scalar::from_u64(index as u64);
        let mut acc = Scalar::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + *c;
        }
        acc
    }

    pub fn share_for(&self, index: u32) -> Share {
        Share {
            index,
            value: self.eval(index),
        }
    }
}

/// Deal `count` shares of `secret` with threshold ℓ (reconstruction needs ℓ+1).
pub fn share<R: RngCore + CryptoRng>(
    secret: &Scalar,
    ell: u32,
    count: u32,
    rng: &mut R,
) -> Result<Vec<Share>, CryptoError> {
    if ell >= count {
        return Err(CryptoError::BadThreshold { ell, count });
    }
    let poly = Polynomial::random_with_secret(*secret, ell, rng);
    Ok((1..=count).map(|i| poly.share_for(i)).collect())
}

/// Lagrange coefficients at x = 0 for the given evaluation points: the secret
/// is `Σ β_u · value_u`. Points must be distinct and nonzero.
pub fn lagrange_at_zero(indices: &[u32]) -> Result<Vec<Scalar>, CryptoError> {
    let mut seen = std::collections::HashSet::new();
    for &i in indices {
        if i == 0 {
            return Err(CryptoError::ZeroShareIndex);
        }
        if !seen.insert(i) {
            return Err(CryptoError::DuplicateShareIndex(i));
        }
    }
    indices
        .iter()
        .map(|&u| {
            let xu = Scalar::from_u64(u as u64);
            let mut num = Scalar::one();
            let mut den = Scalar::one();
            for &v in indices {
                if v != u {
                    let xv = Scalar::from_u64(v as u64);
                    num = num * xv;
                    den = den * (xv - xu);
                }
            }
            // Distinct indices make the denominator nonzero.
            Ok(num * den.invert().expect("nonzero denominator"))
        })
        .collect()
}

/// Lagrange coefficients at an arbitrary point `x`; generalizes
/// [`lagrange_at_zero`] (the `x = 0` case) for re-evaluating a shared
/// polynomial at a new index, as share reconstruction-at-a-point needs.
pub fn lagrange_at(indices: &[u32], x: u32) -> Result<Vec<Scalar>, CryptoError> {
    let mut seen = std::collections::HashSet::new();
    for &i in indices {
        if i == 0 {
            return Err(CryptoError::ZeroShareIndex);
        }
        if !seen.insert(i) {
            return Err(CryptoError::DuplicateShareIndex(i));
        }
    }
    let xs = Scalar::from_u64(x as u64);
    indices
        .iter()
        .map(|&u| {
            let xu = Scalar::from_u64(u as u64);
            let mut num = Scalar::one();
            let mut den = Scalar::one();
            for &v in indices {
                if v != u {
                    let xv = Scalar::from_u64(v as u64);
                    num = num * (xs - xv);
                    den = den * (xu - xv);
                }
            }
            Ok(num * den.invert().expect("nonzero denominator"))
        })
        .collect()
}

/// Evaluate the degree-ℓ polynomial defined by the first ℓ+1 sorted shares
/// at point `x`.
pub fn interpolate_at(shares: &[Share], ell: u32, x: u32) -> Result<Scalar, CryptoError> {
    let need = ell as usize + 1;
    if shares.len() < need {
        return Err(CryptoError::NotEnoughShares {
            need,
            got: shares.len(),
        });
    }
    let mut sorted = shares.to_vec();
    sorted.sort_by_key(|s| s.index);
    let used = &sorted[..need];
    let coeffs = lagrange_at(&used.iter().map(|s| s.index).collect::<Vec<_>>(), x)?;
    Ok(used
        .iter()
        .zip(&coeffs)
        .map(|(s, c)| s.value * *c)
        .sum())
}

/// Reconstruct the secret from at least ℓ+1 shares (first ℓ+1 after sorting).
pub fn recon(shares: &[Share], ell: u32) -> Result<Scalar, CryptoError> {
    let need = ell as usize + 1;
    if shares.len() < need {
        return Err(CryptoError::NotEnoughShares {
            need,
            got: shares.len(),
        });
    }
    let mut sorted = shares.to_vec();
    sorted.sort_by_key(|s| s.index);
    let used = &sorted[..need];
    let betas = lagrange_at_zero(&used.iter().map(|s| s.index).collect::<Vec<_>>())?;
    Ok(used
        .iter()
        .zip(&betas)
        .map(|(s, b)| s.value * *b)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    // Hand-computed reference in Z_11: p(X) = 5 + 2X gives shares
    // (1,7), (2,9), (3,0) and {(1,7),(2,9)} reconstructs 5. The same
    // coefficients over the real field give 7, 9, 11 and the same secret.
    #[test]
    fn matches_mod_11_reference() {
        let mod11 = |x: i64| x.rem_euclid(11) as u64;
        let p = |x: i64| mod11(5 + 2 * x);
        assert_eq!((p(1), p(2), p(3)), (7, 9, 0));
        // β at 0 for {1,2} in Z_11: 2 and -1 ≡ 10; 7·2 + 9·10 = 104 ≡ 5.
        assert_eq!(mod11(7 * 2 + 9 * 10), 5);

        let poly = Polynomial {
            coeffs: vec![Scalar::from_u64(5), Scalar::from_u64(2)],
        };
        let shares: Vec<Share> = (1..=3).map(|i| poly.share_for(i)).collect();
        assert_eq!(shares[0].value, Scalar::from_u64(7));
        assert_eq!(shares[1].value, Scalar::from_u64(9));
        assert_eq!(shares[2].value, Scalar::from_u64(11));
        assert_eq!(
            recon(&[shares[0], shares[2]], 1).unwrap(),
            Scalar::from_u64(5)
        );
    }

    #[test]
    fn beta_coefficients_for_points_one_two() {
        let betas = lagrange_at_zero(&[1, 2]).unwrap();
        assert_eq!(betas[0], Scalar::from_u64(2));
        assert_eq!(betas[1], -Scalar::one());
    }

    #[test]
    fn interpolate_at_recovers_shares_and_secret() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let secret = Scalar::random(&mut rng);
        let shares = share(&secret, 2, 7, &mut rng).unwrap();
        // At x = 0 interpolation is reconstruction.
        assert_eq!(interpolate_at(&shares, 2, 0).unwrap(), secret);
        // At a share index it reproduces that share, including indices beyond
        // the first ℓ+1 actually used.
        for s in &shares {
            assert_eq!(interpolate_at(&shares, 2, s.index).unwrap(), s.value);
        }
    }

    #[test]
    fn only_first_ell_plus_one_sorted_shares_are_used() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let secret = Scalar::random(&mut rng);
        let mut shares = share(&secret, 2, 7, &mut rng).unwrap();
        // Corrupt a share that sorts after the first ℓ+1 = 3.
        shares.sort_by_key(|s| s.index);
        shares[5].value = Scalar::random(&mut rng);
        assert_eq!(recon(&shares, 2).unwrap(), secret);
    }

    #[test]
    fn error_cases() {
        let mut rng = ChaCha20Rng::seed_from_u64(22);
        let s = Scalar::random(&mut rng);
        assert_eq!(
            share(&s, 3, 3, &mut rng),
            Err(CryptoError::BadThreshold { ell: 3, count: 3 })
        );
        let shares = share(&s, 2, 5, &mut rng).unwrap();
        assert_eq!(
            recon(&shares[..2], 2),
            Err(CryptoError::NotEnoughShares { need: 3, got: 2 })
        );
        assert_eq!(
            lagrange_at_zero(&[1, 2, 1]),
            Err(CryptoError::DuplicateShareIndex(1))
        );
        assert_eq!(lagrange_at_zero(&[0, 2]), Err(CryptoError::ZeroShareIndex));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        // Any (ℓ+1)-subset of a dealing reconstructs the secret.
        #[test]
        fn any_threshold_subset_reconstructs(seed in any::<u64>(), ell in 1u32..4, extra in 1u32..4) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let secret = Scalar::random(&mut rng);
            let count = 3 * ell + 1;
            let shares = share(&secret, ell, count, &mut rng).unwrap();
            let take = (ell + 1) as usize;
            let skip = (extra as usize) % (count as usize - take + 1);
            let subset: Vec<Share> = shares.iter().copied().skip(skip).take(take).collect();
            prop_assert_eq!(recon(&subset, ell).unwrap(), secret);
        }
    }
}
