//! Prime-order group backend (ristretto255) behind thin newtypes.
//!
//! Wire format is frozen here: group elements travel as the canonical 32-byte
//! compressed encoding, scalars as 32-byte big-endian integers. Everything
//! above this module speaks `GroupElement`/`Scalar` only, so the backend can
//! be swapped without touching protocol code.

use curve25519_dalek::constants::RISTRETTO_BASEPOINT_POINT;
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoBasepointTable, RistrettoPoint};
use curve25519_dalek::scalar::Scalar as RawScalar;
use curve25519_dalek::traits::{Identity, VartimeMultiscalarMul};
use rand::{CryptoRng, RngCore};

use super::CryptoError;

/// Exponent (field element mod the group order).
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Scalar(pub(crate) RawScalar);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(RawScalar::ZERO)
    }

    pub fn one() -> Self {
        Scalar(RawScalar::ONE)
    }

    pub fn from_u64(x: u64) -> Self {
        Scalar(RawScalar::from(x))
    }

    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Scalar(RawScalar::random(rng))
    }

    /// Uniform nonzero scalar; secret keys and ElGamal nonces must not be 0.
    pub fn random_nonzero<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        loop {
            let s = RawScalar::random(rng);
            if s != RawScalar::ZERO {
                return Scalar(s);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0 == RawScalar::ZERO
    }

    /// Scalar from 64 uniform bytes, reduced mod the group order; the
    /// Fiat–Shamir challenge derivation.
    pub fn from_wide_bytes(bytes: &[u8; 64]) -> Self {
        Scalar(RawScalar::from_bytes_mod_order_wide(bytes))
    }

    pub fn invert(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Scalar(self.0.invert()))
        }
    }

    /// Canonical 32-byte big-endian encoding.
    pub fn to_bytes(&self) -> [u8; 32] {
        let mut le = self.0.to_bytes();
        le.reverse();
        le
    }

    pub fn from_bytes(bytes: &[u8; 32]) -> Result<Self, CryptoError> {
        let mut le = *bytes;
        le.reverse();
        Option::<RawScalar>::from(RawScalar::from_canonical_bytes(le))
            .map(Scalar)
            .ok_or(CryptoError::ScalarEncoding)
    }
}

impl std::ops::Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 - rhs.0)
    }
}

impl std::ops::Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 * rhs.0)
    }
}

impl std::ops::Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl std::ops::AddAssign for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        self.0 += rhs.0;
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        Scalar(iter.map(|s| s.0).sum())
    }
}

impl std::fmt::Debug for Scalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let b = self.to_bytes();
        write!(f, "Scalar({:02x}{:02x}{:02x}{:02x}…)", b[0], b[1], b[2], b[3])
    }
}

/// Group element, written multiplicatively in protocol comments (`g^x`)
/// even though the curve implementation underneath is additive.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct GroupElement(pub(crate) RistrettoPoint);

impl GroupElement {
    pub fn generator() -> Self {
        GroupElement(RISTRETTO_BASEPOINT_POINT)
    }

    pub fn identity() -> Self {
        GroupElement(RistrettoPoint::identity())
    }

    pub fn is_identity(&self) -> bool {
        self.0 == RistrettoPoint::identity()
    }

    /// `g^s` via the built-in precomputed basepoint table.
    pub fn mul_base(s: &Scalar) -> Self {
        GroupElement(RistrettoPoint::mul_base(&s.0))
    }

    /// Variable-time `A^a · g^b`; fine for verification of public values.
    pub fn vartime_double_base(a: &Scalar, point_a: &GroupElement, b: &Scalar) -> Self {
        GroupElement(RistrettoPoint::vartime_double_scalar_mul_basepoint(
            &a.0, &point_a.0, &b.0,
        ))
    }

    /// Variable-time multi-scalar product `Π points[i]^scalars[i]`.
    pub fn vartime_msm(scalars: &[Scalar], points: &[GroupElement]) -> Self {
        debug_assert_eq!(scalars.len(), points.len());
        GroupElement(RistrettoPoint::vartime_multiscalar_mul(
            scalars.iter().map(|s| s.0),
            points.iter().map(|p| p.0),
        ))
    }

    /// Canonical 32-byte compressed encoding.
    pub fn to_bytes(&self) -> [u8; 32] {
        self.0.compress().to_bytes()
    }

    pub fn from_bytes(bytes: &[u8; 32]) -> Result<Self, CryptoError> {
        CompressedRistretto(*bytes)
            .decompress()
            .map(GroupElement)
            .ok_or(CryptoError::GroupEncoding)
    }
}

impl std::ops::Add for GroupElement {
    type Output = GroupElement;
    fn add(self, rhs: GroupElement) -> GroupElement {
        GroupElement(self.0 + rhs.0)
    }
}

impl std::ops::Sub for GroupElement {
    type Output = GroupElement;
    fn sub(self, rhs: GroupElement) -> GroupElement {
        GroupElement(self.0 - rhs.0)
    }
}

impl std::ops::Mul<&Scalar> for &GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: &Scalar) -> GroupElement {
        GroupElement(self.0 * rhs.0)
    }
}

impl std::iter::Sum for GroupElement {
    fn sum<I: Iterator<Item = GroupElement>>(iter: I) -> GroupElement {
        GroupElement(iter.map(|p| p.0).sum())
    }
}

impl std::fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let b = self.to_bytes();
        write!(f, "Group({:02x}{:02x}{:02x}{:02x}…)", b[0], b[1], b[2], b[3])
    }
}

/// Precomputed fixed-base table; worth building once per session for bases
/// used thousands of times per round (the committee public key, above all).
pub struct FixedBaseTable(RistrettoBasepointTable);

impl FixedBaseTable {
    pub fn new(base: &GroupElement) -> Self {
        FixedBaseTable(RistrettoBasepointTable::create(&base.0))
    }

    pub fn mul(&self, s: &Scalar) -> GroupElement {
        GroupElement(&self.0 * &s.0)
    }
}
