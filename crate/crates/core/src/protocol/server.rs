//! Server side of a collection round: accumulate reports, build the labeled
//! decryption request, and finalize the aggregate once decryptors answer.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::crypto::elgamal::{threshold_combine, unblind};
use crate::crypto::group::GroupElement;
use crate::crypto::prg::{apply_mask, Sign};
use crate::crypto::shamir::{recon, Share};
use crate::crypto::Seed;
use crate::graph::RoundGraph;
use crate::protocol::dleq;
use crate::protocol::report::{pair_sign, seed_from_point};
use crate::protocol::types::*;
use crate::protocol::wire::neighbor_sig_bytes;
use crate::{ClientId, Round};

/// Reasons the server ends a round without a sum. These mirror the
/// decryptors' cross-check aborts where the two sides see the same defect.
#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum FinalizeAbort {
    #[error("{got} usable decryptor responses, need at least {need}")]
    InsufficientDecryptors { need: usize, got: usize },
    #[error("mask seed of online client {0} unrecoverable")]
    MaskUnrecoverable(ClientId),
    #[error("pairwise seed for offline client {0} via reporter {1} unrecoverable")]
    PairUnrecoverable(ClientId, ClientId),
}

/// Fold the round's reports into a running sum and build the decryption
/// request plus its evidence bundle.
///
/// Malformed or duplicate reports are dropped, not fatal: a report counts
/// only if it names this round, comes from a cohort member, has the
/// configured vector width, and carries one sealed share per decryptor.
/// Whoever remains is labeled online; everyone else in the cohort is labeled
/// offline and their pairwise ciphertexts are pulled out of their online
/// neighbors' reports.
pub fn server_collect(
    sctx: &SessionContext,
    graph: &RoundGraph,
    t: Round,
    reports: Vec<MaskedVector>,
) -> (PartialSum, RequestBundle) {
    let dim = sctx.config.dim as usize;
    let roster = &sctx.decryptors;
    let mut accepted: BTreeMap<ClientId, MaskedVector> = BTreeMap::new();
    for mv in reports {
        if mv.t != t
            || graph.position(mv.client).is_none()
            || mv.payload.len() != dim
            || mv.mask_shares.len() != roster.len()
            || mv
                .mask_shares
                .iter()
                .zip(roster)
                .any(|(s, &u)| s.decryptor != u)
        {
            continue;
        }
        accepted.entry(mv.client).or_insert(mv);
    }

    let mut acc = vec![0u32; dim];
    for mv in accepted.values() {
        for (a, w) in acc.iter_mut().zip(&mv.payload) {
            *a = a.wrapping_add(*w);
        }
    }

    let online: BTreeSet<ClientId> = accepted.keys().copied().collect();
    let labels = graph
        .members()
        .iter()
        .map(|&id| {
            (
                id,
                if online.contains(&id) {
                    Label::Online
                } else {
                    Label::Offline
                },
            )
        })
        .collect();

    let online_shares = accepted
        .values()
        .map(|mv| {
            (
                mv.client,
                mv.mask_shares
                    .iter()
                    .map(|s| MaskShareCt {
                        decryptor: s.decryptor,
                        ct: s.ct.clone(),
                    })
                    .collect(),
            )
        })
        .collect();

    let mut offline_pairs = Vec::new();
    for &owner in graph.members() {
        if online.contains(&owner) {
            continue;
        }
        for reporter in graph.neighbors(owner).unwrap_or_default() {
            let Some(mv) = accepted.get(&reporter) else {
                continue;
            };
            if let Some(nc) = mv.neighbor_cts.iter().find(|n| n.neighbor == owner) {
                offline_pairs.push(OfflineAttachment {
                    owner,
                    reporter,
                    ct: nc.ct,
                    sig: nc.sig,
                });
            }
        }
    }

    (
        PartialSum {
            t,
            acc,
            online: online.iter().copied().collect(),
        },
        RequestBundle {
            req: DecryptionRequest { t, labels },
            online_shares,
            offline_pairs,
        },
    )
}

/// Result of a finalized round: the aggregate plus which decryptors answered
/// and which were thrown out by proof verification.
#[derive(Debug)]
pub struct FinalizeOutput {
    pub sum: Vec<u32>,
    pub used: Vec<ClientId>,
    pub excluded: Vec<ClientId>,
}

/// Remove the surviving individual masks and restore the orphaned pairwise
/// masks, yielding the plain sum over the online set.
///
/// `registered` holds g^{s_u} per roster position, fixed at setup. With
/// `robust` set, each partial decryption must carry a valid proof of correct
/// decryption against that key; a decryptor failing any proof is dropped
/// entirely, and the round aborts only if fewer than ℓ+1 usable responses
/// remain. Without `robust`, proofs are ignored.
pub fn server_finalize(
    sctx: &SessionContext,
    dir: &Directory,
    graph: &RoundGraph,
    partial: PartialSum,
    bundle: &RequestBundle,
    responses: Vec<DecryptorResponse>,
    registered: &[GroupElement],
    robust: bool,
) -> Result<FinalizeOutput, FinalizeAbort> {
    let ell = sctx.config.ell;
    let need = ell as usize + 1;
    let t = partial.t;

    // Index the attachments the same way decryptors select them: reporter
    // signature verified for this round first, then first-wins dedup. That
    // keeps the ciphertext used for unblinding aligned with the one the
    // partials were computed on even when a duplicate precedes it.
    let mut by_ct: HashMap<(ClientId, ClientId), &OfflineAttachment> = HashMap::new();
    for p in &bundle.offline_pairs {
        let sig_ok = dir
            .sig_pub
            .get(p.reporter as usize)
            .is_some_and(|vk| vk.verify(&neighbor_sig_bytes(&p.ct, t), &p.sig).is_ok());
        if sig_ok {
            by_ct.entry((p.owner, p.reporter)).or_insert(p);
        }
    }

    // Keep one structurally sound response per roster decryptor.
    let mut usable: BTreeMap<ClientId, DecryptorResponse> = BTreeMap::new();
    for resp in responses {
        let Some(index) = sctx.decryptor_share_index(resp.decryptor) else {
            continue;
        };
        if resp.t != t || resp.share_index != index {
            continue;
        }
        usable.entry(resp.decryptor).or_insert(resp);
    }

    let mut excluded = Vec::new();
    if robust {
        usable.retain(|&id, resp| {
            let index = sctx
                .decryptor_share_index(id)
                .expect("roster membership already checked");
            let y1 = &registered[index as usize - 1];
            let ok = resp.partials.iter().all(|p| {
                let Some(att) = by_ct.get(&(p.owner, p.reporter)) else {
                    // A partial for a ciphertext the server never sent proves
                    // nothing either way; it is simply not used.
                    return true;
                };
                p.partial.index == index
                    && p.proof
                        .as_ref()
                        .is_some_and(|pr| dleq::verify(pr, &att.ct.c0, y1, &p.partial.value))
            });
            if !ok {
                excluded.push(id);
            }
            ok
        });
    }

    if usable.len() < need {
        return Err(FinalizeAbort::InsufficientDecryptors {
            need,
            got: usable.len(),
        });
    }

    let mut acc = partial.acc;
    let online: BTreeSet<ClientId> = partial.online.iter().copied().collect();

    // Subtract each online client's individual mask.
    for &i in &partial.online {
        let shares: Vec<Share> = usable
            .values()
            .filter_map(|resp| {
                resp.mask_shares
                    .iter()
                    .find(|s| s.client == i)
                    .map(|s| Share {
                        index: resp.share_index,
                        value: s.value,
                    })
            })
            .collect();
        if shares.len() < need {
            return Err(FinalizeAbort::MaskUnrecoverable(i));
        }
        let m = recon(&shares, ell).map_err(|_| FinalizeAbort::MaskUnrecoverable(i))?;
        apply_mask(&mut acc, &Seed::from_bytes(m.to_bytes()), Sign::Minus);
    }

    // Restore the pairwise masks that lost their counterpart: for each
    // offline owner, every edge to an online reporter left one uncancelled
    // term in the sum, and adding the owner-side term back cancels it.
    for &owner in graph.members() {
        if online.contains(&owner) {
            continue;
        }
        for reporter in graph.neighbors(owner).unwrap_or_default() {
            if !online.contains(&reporter) {
                continue;
            }
            let Some(att) = by_ct.get(&(owner, reporter)) else {
                return Err(FinalizeAbort::PairUnrecoverable(owner, reporter));
            };
            let partials: Vec<_> = usable
                .values()
                .filter_map(|resp| {
                    resp.partials
                        .iter()
                        .find(|p| p.owner == owner && p.reporter == reporter)
                        .map(|p| p.partial.clone())
                })
                .collect();
            let combined = threshold_combine(&partials, ell)
                .map_err(|_| FinalizeAbort::PairUnrecoverable(owner, reporter))?;
            let point = unblind(&att.ct, &combined);
            let seed = seed_from_point(&point, sctx.model_hash.as_deref());
            apply_mask(&mut acc, &seed, pair_sign(owner, reporter));
        }
    }

    Ok(FinalizeOutput {
        sum: acc,
        used: usable.keys().copied().collect(),
        excluded,
    })
}
