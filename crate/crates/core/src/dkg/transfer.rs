//! Proactive transfer of the committee secret to a fresh roster.
//!
//! Every old holder re-shares its share with a degree-ℓ polynomial; new
//! holders combine an agreed ℓ+1 of those dealings with Lagrange weights, so
//! the new shares hide the same SK on a fresh polynomial and the old shares
//! become useless. Dealings carry Feldman commitments whose constant term
//! must equal the dealer's registered g^{s_u} — hiding would buy nothing,
//! that value has been public since setup, and binding makes a wrong
//! re-share publicly attributable.

use std::collections::BTreeMap;

use rand::{CryptoRng, RngCore};

use crate::crypto::group::{GroupElement, Scalar};
use crate::crypto::shamir::{lagrange_at_zero, Polynomial, Share};
use crate::crypto::sig::{Signature, SigningKey, VerifyKey};
use crate::crypto::CryptoError;
use crate::dkg::machine::DkgDest;
use crate::dkg::vss;
use crate::ClientId;

#[derive(Clone, Debug)]
pub enum TransferBody {
    /// Old holder → one new holder: that holder's share of the re-shared
    /// secret, plus the Feldman vector binding the polynomial to g^{s_u}.
    Deal {
        share: Share,
        feldman: Vec<GroupElement>,
    },
    /// New holder → broadcast: the ℓ+1 old dealers it wants combined.
    Vote { dealers: Vec<ClientId> },
}

#[derive(Clone, Debug)]
pub struct TransferMessage {
    pub from: ClientId,
    pub to: DkgDest,
    pub body: TransferBody,
    pub sig: Signature,
}

pub fn transfer_body_bytes(from: ClientId, body: &TransferBody) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(b"aggsum/transfer-v1");
    out.extend_from_slice(&from.to_be_bytes());
    match body {
        TransferBody::Deal { share, feldman } => {
            out.push(1);
            out.extend_from_slice(&share.index.to_be_bytes());
            out.extend_from_slice(&share.value.to_bytes());
            out.extend_from_slice(&(feldman.len() as u32).to_be_bytes());
            for p in feldman {
                out.extend_from_slice(&p.to_bytes());
            }
        }
        TransferBody::Vote { dealers } => {
            out.push(2);
            out.extend_from_slice(&(dealers.len() as u32).to_be_bytes());
            for id in dealers {
                out.extend_from_slice(&id.to_be_bytes());
            }
        }
    }
    out
}

pub fn transfer_message_len(msg: &TransferMessage) -> usize {
    transfer_body_bytes(msg.from, &msg.body).len() + 9 + 64
}

/// Old-holder side: re-share `old_share` toward the new roster. One signed
/// message per new holder.
pub fn deal_transfer<R: RngCore + CryptoRng>(
    from: ClientId,
    old_share: &Share,
    ell: u32,
    new_roster: &[ClientId],
    sig: &SigningKey,
    rng: &mut R,
) -> Vec<TransferMessage> {
    let poly = Polynomial::random_with_secret(old_share.value, ell, rng);
    let feldman: Vec<GroupElement> = poly.coeffs().iter().map(GroupElement::mul_base).collect();
    new_roster
        .iter()
        .enumerate()
        .map(|(j, &to)| {
            let body = TransferBody::Deal {
                share: Share {
                    index: j as u32 + 1,
                    value: poly.eval(j as u32 + 1),
                },
                feldman: feldman.clone(),
            };
            TransferMessage {
                from,
                to: DkgDest::One(to),
                sig: sig.sign(&transfer_body_bytes(from, &body)),
                body,
            }
        })
        .collect()
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum TransferAbort {
    #[error("{got} verifying dealings arrived, need {need}")]
    InsufficientDealings { got: usize, need: usize },
    #[error("largest matching dealer-set vote is {best}, quorum is {need}")]
    VoteDisagreement { best: usize, need: usize },
}

#[derive(Clone, Debug)]
pub struct TransferResult {
    pub share: Share,
    pub dealers: Vec<ClientId>,
    pub pk: GroupElement,
    pub registered: Vec<GroupElement>,
}

#[derive(Debug)]
pub enum TransferOutcome {
    Finished(TransferResult),
    Aborted(TransferAbort),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransferPhase {
    Collect,
    Finish,
    Done,
}

/// New-holder side: two steps. Step one consumes the dealings and votes for
/// the first ℓ+1 old dealers whose re-shares verify; step two consumes the
/// votes and finishes only on a 2ℓ+1 quorum matching its own.
pub struct TransferParty {
    id: ClientId,
    my_index: u32,
    new_roster: Vec<ClientId>,
    old_roster: Vec<ClientId>,
    old_registered: Vec<GroupElement>,
    old_keys: Vec<VerifyKey>,
    new_keys: Vec<VerifyKey>,
    ell: u32,
    sig: SigningKey,
    phase: TransferPhase,
    deals: BTreeMap<ClientId, (Scalar, Vec<GroupElement>)>,
    candidate: Vec<ClientId>,
    outcome: Option<TransferOutcome>,
}

impl TransferParty {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: ClientId,
        new_roster: Vec<ClientId>,
        old_roster: Vec<ClientId>,
        old_registered: Vec<GroupElement>,
        old_keys: Vec<VerifyKey>,
        new_keys: Vec<VerifyKey>,
        ell: u32,
        sig: SigningKey,
    ) -> Self {
        let my_index = new_roster
            .iter()
            .position(|&r| r == id)
            .expect("party must be on the new roster") as u32
            + 1;
        TransferParty {
            id,
            my_index,
            new_roster,
            old_roster,
            old_registered,
            old_keys,
            new_keys,
            ell,
            sig,
            phase: TransferPhase::Collect,
            deals: BTreeMap::new(),
            candidate: Vec::new(),
            outcome: None,
        }
    }

    pub fn id(&self) -> ClientId {
        self.id
    }

    pub fn phase(&self) -> TransferPhase {
        self.phase
    }

    pub fn outcome(&self) -> Option<&TransferOutcome> {
        self.outcome.as_ref()
    }

    pub fn take_outcome(&mut self) -> Option<TransferOutcome> {
        self.outcome.take()
    }

    fn abort(&mut self, why: TransferAbort) -> Vec<TransferMessage> {
        self.outcome = Some(TransferOutcome::Aborted(why));
        self.phase = TransferPhase::Done;
        Vec::new()
    }

    pub fn step(&mut self, inbox: Vec<TransferMessage>) -> Vec<TransferMessage> {
        match self.phase {
            TransferPhase::Collect => self.step_collect(inbox),
            TransferPhase::Finish => self.step_finish(inbox),
            TransferPhase::Done => Vec::new(),
        }
    }

    fn step_collect(&mut self, inbox: Vec<TransferMessage>) -> Vec<TransferMessage> {
        for msg in inbox {
            let TransferBody::Deal { share, feldman } = &msg.body else {
                continue;
            };
            let Ok(pos) = self.old_roster.binary_search(&msg.from) else {
                continue;
            };
            if self.old_keys[pos]
                .verify(&transfer_body_bytes(msg.from, &msg.body), &msg.sig)
                .is_err()
            {
                continue;
            }
            // The re-share must target us, commit to a degree-ℓ polynomial
            // anchored at the dealer's registered share key, and lie on it.
            if share.index != self.my_index
                || feldman.len() != self.ell as usize + 1
                || feldman[0] != self.old_registered[pos]
                || !vss::feldman_verify(share.index, &share.value, feldman)
            {
                continue;
            }
            self.deals
                .entry(msg.from)
                .or_insert((share.value, feldman.clone()));
        }

        let need = self.ell as usize + 1;
        if self.deals.len() < need {
            return self.abort(TransferAbort::InsufficientDealings {
                got: self.deals.len(),
                need,
            });
        }
        self.candidate = self.deals.keys().copied().take(need).collect();
        let body = TransferBody::Vote {
            dealers: self.candidate.clone(),
        };
        self.phase = TransferPhase::Finish;
        vec![TransferMessage {
            from: self.id,
            to: DkgDest::All,
            sig: self.sig.sign(&transfer_body_bytes(self.id, &body)),
            body,
        }]
    }

    fn step_finish(&mut self, inbox: Vec<TransferMessage>) -> Vec<TransferMessage> {
        let mut votes: BTreeMap<ClientId, Vec<ClientId>> = BTreeMap::new();
        votes.insert(self.id, self.candidate.clone());
        for msg in inbox {
            let TransferBody::Vote { dealers } = &msg.body else {
                continue;
            };
            let Ok(pos) = self.new_roster.binary_search(&msg.from) else {
                continue;
            };
            if self.new_keys[pos]
                .verify(&transfer_body_bytes(msg.from, &msg.body), &msg.sig)
                .is_ok()
            {
                votes.entry(msg.from).or_insert(dealers.clone());
            }
        }
        let quorum = 2 * self.ell as usize + 1;
        let matching = votes.values().filter(|v| **v == self.candidate).count();
        if matching < quorum {
            let mut tally: BTreeMap<&[ClientId], usize> = BTreeMap::new();
            for v in votes.values() {
                *tally.entry(v.as_slice()).or_default() += 1;
            }
            return self.abort(TransferAbort::VoteDisagreement {
                best: tally.values().copied().max().unwrap_or(0),
                need: quorum,
            });
        }

        let indices: Vec<u32> = self
            .candidate
            .iter()
            .map(|d| self.old_roster.binary_search(d).unwrap() as u32 + 1)
            .collect();
        let betas = lagrange_at_zero(&indices).expect("distinct nonzero indices");
        let value: Scalar = self
            .candidate
            .iter()
            .zip(&betas)
            .map(|(d, b)| self.deals[d].0 * *b)
            .sum();
        let feldmans: Vec<&Vec<GroupElement>> =
            self.candidate.iter().map(|d| &self.deals[d].1).collect();
        let pk = combine(&betas, feldmans.iter().map(|f| f[0]));
        let registered = (1..=self.new_roster.len() as u32)
            .map(|idx| {
                combine(
                    &betas,
                    feldmans.iter().map(|f| vss::feldman_eval(idx, f)),
                )
            })
            .collect();

        self.outcome = Some(TransferOutcome::Finished(TransferResult {
            share: Share {
                index: self.my_index,
                value,
            },
            dealers: self.candidate.clone(),
            pk,
            registered,
        }));
        self.phase = TransferPhase::Done;
        Vec::new()
    }
}

fn combine(betas: &[Scalar], values: impl Iterator<Item = GroupElement>) -> GroupElement {
    let values: Vec<GroupElement> = values.collect();
    GroupElement::vartime_msm(betas, &values)
}

/// The whole transfer as one straight-line computation, for when nothing can
/// go wrong: re-share through the first ℓ+1 old shares and hand back one new
/// share per new index. The machine above reduces to this on honest runs.
pub fn transfer_shares<R: RngCore + CryptoRng>(
    old_shares: &[Share],
    ell: u32,
    new_count: u32,
    rng: &mut R,
) -> Result<Vec<Share>, CryptoError> {
    let need = ell as usize + 1;
    if old_shares.len() < need {
        return Err(CryptoError::NotEnoughShares {
            need,
            got: old_shares.len(),
        });
    }
    let mut sorted = old_shares.to_vec();
    sorted.sort_by_key(|s| s.index);
    let used = &sorted[..need];
    let betas = lagrange_at_zero(&used.iter().map(|s| s.index).collect::<Vec<_>>())?;
    let polys: Vec<Polynomial> = used
        .iter()
        .map(|s| Polynomial::random_with_secret(s.value, ell, rng))
        .collect();
    Ok((1..=new_count)
        .map(|j| Share {
            index: j,
            value: polys
                .iter()
                .zip(&betas)
                .map(|(p, b)| p.eval(j) * *b)
                .sum(),
        })
        .collect())
}
