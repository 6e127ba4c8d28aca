use rand::{CryptoRng, RngCore};

/// Security parameter in bits; seeds, PRF keys and PRF outputs are all this wide.
pub const LAMBDA: usize = 256;

/// A λ-bit seed / symmetric key. Also the PRF output type, so PRF chains
/// (`v → v* → …`) compose without conversions.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed([u8; 32]);

impl Seed {
    pub const LEN: usize = LAMBDA / 8;

    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        Seed(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let mut bytes = [0u8; 32];
        rng.fill_bytes(&mut bytes);
        Seed(bytes)
    }
}

impl std::fmt::Debug for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // Identify without disclosing: first four bytes only.
        write!(
            f,
            "Seed({:02x}{:02x}{:02x}{:02x}…)",
            self.0[0], self.0[1], self.0[2], self.0[3]
        )
    }
}
