//! Decryptor side of a collection round: sign the server's request, check
//! that enough peers saw the same one, then answer it.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{CryptoRng, RngCore};

use crate::crypto::elgamal::partial_decrypt;
use crate::crypto::group::{GroupElement, Scalar};
use crate::crypto::shamir::Share;
use crate::crypto::aead;
use crate::graph::RoundGraph;
use crate::protocol::dleq;
use crate::protocol::types::*;
use crate::protocol::wire::{neighbor_sig_bytes, request_bytes};
use crate::{ClientId, Round};

/// Why a decryptor refuses to act on a round. Each maps to one failed check;
/// a single honest decryptor hitting any of these stays silent, and the round
/// dies at the server's response threshold.
#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum CheckAbort {
    #[error("request is for round {got}, current round is {expected}")]
    RoundMismatch { expected: Round, got: Round },
    #[error("largest set of identical signed requests is {best}, quorum is {need}")]
    NoQuorum { need: usize, best: usize },
    #[error("labels do not cover the cohort exactly once")]
    BadLabeling,
    #[error("{online} clients labeled online, floor is {required}")]
    TooFewOnline { online: usize, required: usize },
    #[error("online subgraph is disconnected")]
    Disconnected,
    #[error("online client {client} has {got} online neighbors, floor is {need}")]
    TooFewOnlineNeighbors {
        client: ClientId,
        got: usize,
        need: u32,
    },
}

/// Sign the request the server showed us, after pinning it to the round we
/// are actually in — a stale or future-dated request is refused outright.
pub fn sign_request(
    session: &ClientSession,
    t: Round,
    req: DecryptionRequest,
) -> Result<SignedRequest, CheckAbort> {
    if req.t != t {
        return Err(CheckAbort::RoundMismatch { expected: t, got: req.t });
    }
    let sig = session.keys.sig.sign(&request_bytes(&req));
    Ok(SignedRequest {
        decryptor: session.id(),
        req,
        sig,
    })
}

/// The cross-check: find 2ℓ+1 identical, correctly signed copies of the
/// request among roster members, then vet the winning request's labeling
/// against the round graph. Returns the agreed request.
pub fn cross_check(
    sctx: &SessionContext,
    dir: &Directory,
    graph: &RoundGraph,
    t: Round,
    signed: &[SignedRequest],
) -> Result<DecryptionRequest, CheckAbort> {
    let need = 2 * sctx.config.ell as usize + 1;

    // One vote per roster decryptor, and only for well-signed, current-round
    // copies.
    let mut votes: BTreeMap<ClientId, &SignedRequest> = BTreeMap::new();
    for sr in signed {
        if sctx.decryptor_share_index(sr.decryptor).is_none() || sr.req.t != t {
            continue;
        }
        let Some(vk) = dir.sig_pub.get(sr.decryptor as usize) else {
            continue;
        };
        if vk.verify(&request_bytes(&sr.req), &sr.sig).is_err() {
            continue;
        }
        votes.entry(sr.decryptor).or_insert(sr);
    }

    let mut tally: HashMap<Vec<u8>, (usize, &DecryptionRequest)> = HashMap::new();
    for sr in votes.values() {
        let entry = tally
            .entry(request_bytes(&sr.req))
            .or_insert((0, &sr.req));
        entry.0 += 1;
    }
    let Some((_, (_, req))) = tally.iter().find(|(_, (count, _))| *count >= need) else {
        let best = tally.values().map(|(c, _)| *c).max().unwrap_or(0);
        return Err(CheckAbort::NoQuorum { need, best });
    };
    let req = (*req).clone();

    // The labeling must cover the cohort exactly.
    let labeled: Vec<ClientId> = req.labels.iter().map(|(id, _)| *id).collect();
    let mut sorted = labeled.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != labeled.len() || sorted != graph.members() {
        return Err(CheckAbort::BadLabeling);
    }

    // Dropout budget: at most ⌊δ·n_t⌋ clients may be labeled offline.
    let n_t = graph.len();
    let max_dropouts = (sctx.config.delta * n_t as f64).floor() as usize;
    let online: BTreeSet<ClientId> = req.online().collect();
    let required = n_t - max_dropouts;
    if online.len() < required {
        return Err(CheckAbort::TooFewOnline {
            online: online.len(),
            required,
        });
    }

    if !graph.is_connected_within(&online) {
        return Err(CheckAbort::Disconnected);
    }

    for &i in &online {
        let got = graph.online_neighbors(i, &online).len();
        if got < sctx.config.k_min as usize {
            return Err(CheckAbort::TooFewOnlineNeighbors {
                client: i,
                got,
                need: sctx.config.k_min,
            });
        }
    }

    Ok(req)
}

/// Answer an agreed request: open our sealed share of each online client's
/// mask seed, and partially decrypt each offline pairwise ciphertext whose
/// reporter signature and graph edge check out. Anything that fails checks is
/// skipped item by item — one bad envelope never silences the rest.
pub fn respond<R: RngCore + CryptoRng>(
    session: &mut ClientSession,
    sctx: &SessionContext,
    dir: &Directory,
    graph: &RoundGraph,
    share: &Share,
    req: &DecryptionRequest,
    bundle: &RequestBundle,
    robust: bool,
    rng: &mut R,
) -> Result<DecryptorResponse, ProtocolError> {
    let me = session.id();
    let index = sctx
        .decryptor_share_index(me)
        .ok_or(ProtocolError::NotADecryptor(me))?;
    let t = req.t;

    let by_client: HashMap<ClientId, &Vec<MaskShareCt>> = bundle
        .online_shares
        .iter()
        .map(|(id, shares)| (*id, shares))
        .collect();

    let mut mask_shares = Vec::new();
    for i in req.online() {
        let Some(cts) = by_client.get(&i) else {
            continue;
        };
        let Some(slot) = cts.iter().find(|s| s.decryptor == me) else {
            continue;
        };
        let key = session.sym_key(dir, i);
        let Ok(plain) = aead::open(&key, t, &slot.ct) else {
            continue;
        };
        let Ok(bytes) = <[u8; 32]>::try_from(plain.as_slice()) else {
            continue;
        };
        let Ok(value) = Scalar::from_bytes(&bytes) else {
            continue;
        };
        mask_shares.push(RecoveredMaskShare { client: i, value });
    }

    let labels: HashMap<ClientId, Label> = req.labels.iter().copied().collect();
    let y1 = GroupElement::mul_base(&share.value);
    let mut seen: BTreeSet<(ClientId, ClientId)> = BTreeSet::new();
    let mut partials = Vec::new();
    for att in &bundle.offline_pairs {
        // Decrypt only ciphertexts that belong in this round's recovery: the
        // owner must be a labeled dropout, the reporter a labeled survivor,
        // the edge real, and the reporter's round-bound signature valid.
        // Deduplication comes *after* those checks so a planted stale copy
        // cannot shadow the legitimate one.
        if labels.get(&att.owner) != Some(&Label::Offline)
            || labels.get(&att.reporter) != Some(&Label::Online)
            || !graph.has_edge(att.owner, att.reporter)
        {
            continue;
        }
        let Some(vk) = dir.sig_pub.get(att.reporter as usize) else {
            continue;
        };
        if vk.verify(&neighbor_sig_bytes(&att.ct, t), &att.sig).is_err() {
            continue;
        }
        if !seen.insert((att.owner, att.reporter)) {
            continue;
        }
        let partial = partial_decrypt(share, &att.ct.c0);
        let proof = robust
            .then(|| dleq::prove(&share.value, &att.ct.c0, &y1, &partial.value, rng));
        partials.push(PartialWithProof {
            owner: att.owner,
            reporter: att.reporter,
            partial,
            proof,
        });
    }

    debug_assert_eq!(share.index, index);
    Ok(DecryptorResponse {
        decryptor: me,
        share_index: index,
        t,
        mask_shares,
        partials,
    })
}
