//! Shared data types for the per-round collection protocol.

use std::collections::HashMap;

use rand::{CryptoRng, RngCore};

use crate::crypto::elgamal::Ciphertext;
use crate::crypto::group::{GroupElement, Scalar};
use crate::crypto::prf::prf_pair;
use crate::crypto::sig::{Signature, SigningKey, VerifyKey};
use crate::crypto::{aead::SymKey, group_to_seed, CryptoError, Seed};
use crate::graph::{GraphError, RoundContext};
use crate::params::ProtocolConfig;
use crate::{ClientId, Round};

/// Long-term key material held by one client: two DH secrets (one feeding the
/// pairwise mask seeds, one feeding the symmetric channels to decryptors) and
/// a signing key registered with the PKI.
pub struct ClientKeys {
    pub id: ClientId,
    pub dh: Scalar,
    pub enc: Scalar,
    pub sig: SigningKey,
}

impl ClientKeys {
    pub fn generate<R: RngCore + CryptoRng>(id: ClientId, rng: &mut R) -> Self {
        ClientKeys {
            id,
            dh: Scalar::random_nonzero(rng),
            enc: Scalar::random_nonzero(rng),
            sig: SigningKey::generate(rng),
        }
    }
}

/// Public halves of every client's keys, indexed by client id. Stands in for
/// the PKI/bulletin board: everyone reads the same directory.
pub struct Directory {
    pub dh_pub: Vec<GroupElement>,
    pub enc_pub: Vec<GroupElement>,
    pub sig_pub: Vec<VerifyKey>,
}

impl Directory {
    /// Build the directory from all clients' key material, in id order.
    pub fn publish(keys: &[ClientKeys]) -> Self {
        Directory {
            dh_pub: keys.iter().map(|k| GroupElement::mul_base(&k.dh)).collect(),
            enc_pub: keys
                .iter()
                .map(|k| GroupElement::mul_base(&k.enc))
                .collect(),
            sig_pub: keys.iter().map(|k| k.sig.verify_key()).collect(),
        }
    }

    pub fn client_count(&self) -> u64 {
        self.dh_pub.len() as u64
    }
}

/// Session-wide public context fixed at setup: the random graph seed, the
/// committee public key, the sorted decryptor roster (share index = position
/// + 1), and an optional model digest mixed into the pairwise mask seeds.
pub struct SessionContext {
    pub config: ProtocolConfig,
    pub v: Seed,
    pub pk: GroupElement,
    pub decryptors: Vec<ClientId>,
    pub model_hash: Option<Vec<u8>>,
}

impl SessionContext {
    pub fn round_context(&self, t: Round) -> RoundContext {
        RoundContext {
            v: self.v,
            t,
            n_t: self.config.cohort_size,
            n_total: self.config.n_total,
            rho: self.config.rho,
        }
    }

    /// Share index of a decryptor (1-based position in the sorted roster).
    pub fn decryptor_share_index(&self, id: ClientId) -> Option<u32> {
        self.decryptors.iter().position(|&d| d == id).map(|p| p as u32 + 1)
    }
}

/// Per-client state that persists across rounds: the long-term keys plus
/// caches of the derived pairwise secrets, so the DH work happens once per
/// counterpart rather than once per round.
pub struct ClientSession {
    pub keys: ClientKeys,
    pair_seeds: HashMap<ClientId, Seed>,
    sym_keys: HashMap<ClientId, SymKey>,
}

impl ClientSession {
    pub fn new(keys: ClientKeys) -> Self {
        ClientSession {
            keys,
            pair_seeds: HashMap::new(),
            sym_keys: HashMap::new(),
        }
    }

    pub fn id(&self) -> ClientId {
        self.keys.id
    }

    /// Long-term pairwise secret with client `j`, derived from DH and cached.
    /// Symmetric: both endpoints compute the same seed.
    pub fn pair_seed(&mut self, dir: &Directory, j: ClientId) -> Seed {
        let keys = &self.keys;
        *self.pair_seeds.entry(j).or_insert_with(|| {
            let shared = &dir.dh_pub[j as usize] * &keys.dh;
            group_to_seed(&shared)
        })
    }

    /// Symmetric channel key with decryptor `u`, derived from the second DH
    /// secret and cached. Also symmetric.
    pub fn sym_key(&mut self, dir: &Directory, u: ClientId) -> SymKey {
        let keys = &self.keys;
        self.sym_keys
            .entry(u)
            .or_insert_with(|| {
                let shared = &dir.enc_pub[u as usize] * &keys.enc;
                SymKey::from_seed(&group_to_seed(&shared))
            })
            .clone()
    }

    /// Round-scoped PRF key for the pair (self, j): kdf of the pairwise seed
    /// by round, ordered so both endpoints agree.
    pub fn round_pair_seed(&mut self, dir: &Directory, j: ClientId, t: Round) -> Seed {
        let r = self.pair_seed(dir, j);
        let (lo, hi) = if self.keys.id < j { (self.keys.id, j) } else { (j, self.keys.id) };
        crate::crypto::prf::prf_round(&prf_pair(&r, lo, hi), t)
    }
}

/// One client's per-round report: the masked vector, the Shamir shares of its
/// individual mask seed (AEAD-sealed, one per decryptor, roster order) and one
/// ElGamal ciphertext per graph neighbor carrying the pairwise mask point,
/// signed together with the round number.
#[derive(Clone, Debug)]
pub struct MaskedVector {
    pub client: ClientId,
    pub t: Round,
    pub payload: Vec<u32>,
    pub mask_shares: Vec<MaskShareCt>,
    pub neighbor_cts: Vec<NeighborCt>,
}

#[derive(Clone, Debug)]
pub struct MaskShareCt {
    pub decryptor: ClientId,
    pub ct: Vec<u8>,
}

#[derive(Clone, Debug)]
pub struct NeighborCt {
    pub neighbor: ClientId,
    pub ct: Ciphertext,
    pub sig: Signature,
}

/// Label the server assigns each cohort member in its decryption request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Online,
    Offline,
}

/// The server's per-round decryption request: one label per cohort member.
/// Decryptors cross-check bitwise-identical copies of this message, so its
/// canonical byte encoding (see [`super::wire`]) is what gets signed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecryptionRequest {
    pub t: Round,
    pub labels: Vec<(ClientId, Label)>,
}

impl DecryptionRequest {
    pub fn online(&self) -> impl Iterator<Item = ClientId> + '_ {
        self.labels
            .iter()
            .filter(|(_, l)| *l == Label::Online)
            .map(|(id, _)| *id)
    }

    pub fn offline(&self) -> impl Iterator<Item = ClientId> + '_ {
        self.labels
            .iter()
            .filter(|(_, l)| *l == Label::Offline)
            .map(|(id, _)| *id)
    }
}

/// Attachment for one recoverable pairwise seed: the ciphertext that online
/// `reporter` produced for its offline neighbor `owner`, plus the reporter's
/// signature binding it to the round.
#[derive(Clone, Debug)]
pub struct OfflineAttachment {
    pub owner: ClientId,
    pub reporter: ClientId,
    pub ct: Ciphertext,
    pub sig: Signature,
}

/// Everything the server sends each decryptor in the request step: the
/// request itself plus the evidence needed to act on it — the sealed mask
/// shares of every online client and the pairwise ciphertexts covering every
/// (offline owner, online reporter) edge.
#[derive(Clone, Debug)]
pub struct RequestBundle {
    pub req: DecryptionRequest,
    pub online_shares: Vec<(ClientId, Vec<MaskShareCt>)>,
    pub offline_pairs: Vec<OfflineAttachment>,
}

/// A decryptor's signature over the canonical bytes of the request it was
/// shown. Collecting 2ℓ+1 identical signed requests is the consistency check.
#[derive(Clone, Debug)]
pub struct SignedRequest {
    pub decryptor: ClientId,
    pub req: DecryptionRequest,
    pub sig: Signature,
}

/// A decryptor's answer after a successful cross-check: opened mask shares
/// for online clients and partial decryptions (optionally with proofs of
/// correct decryption) for the offline pairwise ciphertexts.
#[derive(Clone, Debug)]
pub struct DecryptorResponse {
    pub decryptor: ClientId,
    pub share_index: u32,
    pub t: Round,
    pub mask_shares: Vec<RecoveredMaskShare>,
    pub partials: Vec<PartialWithProof>,
}

#[derive(Clone, Debug)]
pub struct RecoveredMaskShare {
    pub client: ClientId,
    pub value: Scalar,
}

#[derive(Clone, Debug)]
pub struct PartialWithProof {
    pub owner: ClientId,
    pub reporter: ClientId,
    pub partial: crate::crypto::elgamal::PartialDecryption,
    pub proof: Option<super::dleq::DleqProof>,
}

/// Running state the server keeps between collection and finalization.
#[derive(Clone, Debug)]
pub struct PartialSum {
    pub t: Round,
    pub acc: Vec<u32>,
    pub online: Vec<ClientId>,
}

/// Errors raised by protocol operations (distinct from the abort reasons,
/// which are protocol outcomes rather than caller mistakes).
#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("input vector has {got} entries, configured width is {want}")]
    DimMismatch { want: u32, got: usize },
    #[error("client {0} is not on the decryptor roster")]
    NotADecryptor(ClientId),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
