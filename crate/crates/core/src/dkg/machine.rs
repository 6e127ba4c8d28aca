//! The setup ceremony, phrased as a message-driven state machine.
//!
//! Each roster member runs one [`DkgParty`]; every call to [`DkgParty::step`]
//! consumes the messages delivered during the previous waiting period and
//! emits the next batch. Seven steps take a party from dealing to either a
//! finished key share or a local abort; the relay between parties (and any
//! mischief it gets up to) is entirely the caller's problem, which is what
//! makes equivocation and suppression testable.
//!
//! Phases: deal → verify (complain) → reveal → qualify → cross-check →
//! commitment reveal → commitment check → finish. Agreement hangs on two
//! quorums of 2ℓ+1: identical qualified-dealer sets, and identical signed
//! public keys (the latter checked by whoever collects the [`DkgBody::Pk`]
//! messages).

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::crypto::group::{GroupElement, Scalar};
use crate::crypto::shamir::{interpolate_at, Share};
use crate::crypto::sig::{Signature, SigningKey, VerifyKey};
use crate::dkg::vss::{self, Dealing, PedersenShare};
use crate::ClientId;

/// Who a message is for. The relay may ignore this; recipients re-validate
/// everything that matters, so misrouting is at worst suppression.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DkgDest {
    All,
    One(ClientId),
}

#[derive(Clone, Debug)]
pub enum DkgBody {
    /// Dealer → one recipient: that recipient's share pair plus the dealer's
    /// Pedersen commitment vector.
    Deal {
        share: PedersenShare,
        commitments: Vec<GroupElement>,
    },
    /// Broadcast: the sender's share from `dealer` was missing or bad.
    Complaint { dealer: ClientId },
    /// Dealer → broadcast: the complainer's share pair, in the open, with the
    /// commitments echoed so even a party that never saw the dealing can
    /// check it.
    Reveal {
        complainer: ClientId,
        share: PedersenShare,
        commitments: Vec<GroupElement>,
    },
    /// Broadcast: the sender's qualified-dealer set.
    Qual { qual: Vec<ClientId> },
    /// Broadcast by qualified dealers: their Feldman commitment vector.
    Feldman { feldman: Vec<GroupElement> },
    /// Broadcast: sender's share from `dealer` is commitment-consistent but
    /// off the dealer's revealed polynomial — published as evidence.
    FeldmanComplaint {
        dealer: ClientId,
        share: PedersenShare,
    },
    /// Broadcast: the sender finished and vouches for this public key.
    Pk { pk: GroupElement },
}

#[derive(Clone, Debug)]
pub struct DkgMessage {
    pub from: ClientId,
    pub to: DkgDest,
    pub body: DkgBody,
    pub sig: Signature,
}

/// Canonical signing bytes for a message body. Shares and commitments are
/// fixed-width, so a tag byte plus field order is enough.
pub fn dkg_body_bytes(from: ClientId, body: &DkgBody) -> Vec<u8> {
    fn put_share(out: &mut Vec<u8>, s: &PedersenShare) {
        out.extend_from_slice(&s.index.to_be_bytes());
        out.extend_from_slice(&s.value.to_bytes());
        out.extend_from_slice(&s.blind.to_bytes());
    }
    fn put_points(out: &mut Vec<u8>, points: &[GroupElement]) {
        out.extend_from_slice(&(points.len() as u32).to_be_bytes());
        for p in points {
            out.extend_from_slice(&p.to_bytes());
        }
    }
    let mut out = Vec::new();
    out.extend_from_slice(b"aggsum/dkg-v1");
    out.extend_from_slice(&from.to_be_bytes());
    match body {
        DkgBody::Deal {
            share,
            commitments,
        } => {
            out.push(1);
            put_share(&mut out, share);
            put_points(&mut out, commitments);
        }
        DkgBody::Complaint { dealer } => {
            out.push(2);
            out.extend_from_slice(&dealer.to_be_bytes());
        }
        DkgBody::Reveal {
            complainer,
            share,
            commitments,
        } => {
            out.push(3);
            out.extend_from_slice(&complainer.to_be_bytes());
            put_share(&mut out, share);
            put_points(&mut out, commitments);
        }
        DkgBody::Qual { qual } => {
            out.push(4);
            out.extend_from_slice(&(qual.len() as u32).to_be_bytes());
            for id in qual {
                out.extend_from_slice(&id.to_be_bytes());
            }
        }
        DkgBody::Feldman { feldman } => {
            out.push(5);
            put_points(&mut out, feldman);
        }
        DkgBody::FeldmanComplaint { dealer, share } => {
            out.push(6);
            out.extend_from_slice(&dealer.to_be_bytes());
            put_share(&mut out, share);
        }
        DkgBody::Pk { pk } => {
            out.push(7);
            out.extend_from_slice(&pk.to_bytes());
        }
    }
    out
}

/// Rough wire size of a message — header, body, signature — for byte
/// accounting. Nothing parses this; the canonical bytes are the signed part.
pub fn dkg_message_len(msg: &DkgMessage) -> usize {
    dkg_body_bytes(msg.from, &msg.body).len() + 9 + 64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DkgPhase {
    Deal,
    Verify,
    Reveal,
    Qualify,
    CrossCheck,
    FeldmanReveal,
    FeldmanCheck,
    Finish,
    Done,
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum DkgAbort {
    #[error("{got} valid dealings arrived, floor is {need}")]
    InsufficientDealings { got: usize, need: usize },
    #[error("only {got} qualified dealers, secrecy needs {need}")]
    QualTooSmall { got: usize, need: usize },
    #[error("largest matching qualified-set vote is {best}, quorum is {need}")]
    QualDisagreement { best: usize, need: usize },
    #[error("dealer {0} was condemned but {1} shares are too few to rebuild its polynomial")]
    Reconstruction(ClientId, usize),
}

/// A finished party's output: its share of SK, the agreed dealer set, the
/// public key, and g^{s_j} for every roster position — the verification keys
/// the proof-of-decryption extension checks against.
#[derive(Clone, Debug)]
pub struct DkgResult {
    pub share: Share,
    pub qual: Vec<ClientId>,
    pub pk: GroupElement,
    pub registered: Vec<GroupElement>,
}

#[derive(Debug)]
pub enum DkgOutcome {
    Finished(DkgResult),
    Aborted(DkgAbort),
}

pub struct DkgParty {
    id: ClientId,
    my_index: u32,
    roster: Vec<ClientId>,
    verify_keys: Vec<VerifyKey>,
    ell: u32,
    delta_d: f64,
    sig: SigningKey,
    rng: ChaCha20Rng,
    phase: DkgPhase,
    dealing: Option<Dealing>,
    /// Valid dealings seen so far: my share pair plus the dealer's Pedersen
    /// commitments (adopted from a reveal if the dealing itself never came).
    deals: BTreeMap<ClientId, (PedersenShare, Vec<GroupElement>)>,
    complaints: BTreeSet<(ClientId, ClientId)>,
    /// (complainer, dealer) pairs answered by a verifying reveal; our own
    /// answers are recorded here at emit time, like every self-broadcast.
    resolved: BTreeSet<(ClientId, ClientId)>,
    qual: Vec<ClientId>,
    feldman: BTreeMap<ClientId, Vec<GroupElement>>,
    fcomplaints: BTreeMap<ClientId, BTreeMap<ClientId, PedersenShare>>,
    outcome: Option<DkgOutcome>,
}

impl DkgParty {
    /// `roster` must be sorted and contain `id`; `verify_keys` aligns with
    /// it. The rng seed should be unique per party — it drives the dealt
    /// polynomial.
    pub fn new(
        id: ClientId,
        roster: Vec<ClientId>,
        verify_keys: Vec<VerifyKey>,
        ell: u32,
        delta_d: f64,
        sig: SigningKey,
        rng_seed: [u8; 32],
    ) -> Self {
        let my_index = roster
            .iter()
            .position(|&r| r == id)
            .expect("party must be on the roster") as u32
            + 1;
        DkgParty {
            id,
            my_index,
            roster,
            verify_keys,
            ell,
            delta_d,
            sig,
            rng: ChaCha20Rng::from_seed(rng_seed),
            phase: DkgPhase::Deal,
            dealing: None,
            deals: BTreeMap::new(),
            complaints: BTreeSet::new(),
            resolved: BTreeSet::new(),
            qual: Vec::new(),
            feldman: BTreeMap::new(),
            fcomplaints: BTreeMap::new(),
            outcome: None,
        }
    }

    pub fn id(&self) -> ClientId {
        self.id
    }

    pub fn phase(&self) -> DkgPhase {
        self.phase
    }

    pub fn outcome(&self) -> Option<&DkgOutcome> {
        self.outcome.as_ref()
    }

    pub fn take_outcome(&mut self) -> Option<DkgOutcome> {
        self.outcome.take()
    }

    fn count(&self) -> usize {
        self.roster.len()
    }

    fn quorum(&self) -> usize {
        2 * self.ell as usize + 1
    }

    fn index_of(&self, id: ClientId) -> Option<u32> {
        self.roster
            .binary_search(&id)
            .ok()
            .map(|p| p as u32 + 1)
    }

    fn sign(&self, to: DkgDest, body: DkgBody) -> DkgMessage {
        let sig = self.sig.sign(&dkg_body_bytes(self.id, &body));
        DkgMessage {
            from: self.id,
            to,
            body,
            sig,
        }
    }

    /// Signature + roster check every inbound message must pass.
    fn well_signed(&self, msg: &DkgMessage) -> bool {
        match self.roster.binary_search(&msg.from) {
            Ok(pos) => self.verify_keys[pos]
                .verify(&dkg_body_bytes(msg.from, &msg.body), &msg.sig)
                .is_ok(),
            Err(_) => false,
        }
    }

    fn abort(&mut self, why: DkgAbort) -> Vec<DkgMessage> {
        self.outcome = Some(DkgOutcome::Aborted(why));
        self.phase = DkgPhase::Done;
        Vec::new()
    }

    /// Advance one phase: consume what arrived during the last waiting
    /// period, emit what should go out during the next.
    pub fn step(&mut self, inbox: Vec<DkgMessage>) -> Vec<DkgMessage> {
        let inbox: Vec<DkgMessage> = inbox
            .into_iter()
            .filter(|m| self.well_signed(m))
            .collect();
        match self.phase {
            DkgPhase::Deal => self.step_deal(),
            DkgPhase::Verify => self.step_verify(inbox),
            DkgPhase::Reveal => self.step_reveal(inbox),
            DkgPhase::Qualify => self.step_qualify(inbox),
            DkgPhase::CrossCheck => self.step_cross_check(inbox),
            DkgPhase::FeldmanReveal => self.step_feldman_reveal(inbox),
            DkgPhase::FeldmanCheck => self.step_feldman_check(inbox),
            DkgPhase::Finish => self.step_finish(inbox),
            DkgPhase::Done => Vec::new(),
        }
    }

    fn step_deal(&mut self) -> Vec<DkgMessage> {
        let secret = Scalar::random_nonzero(&mut self.rng);
        let dealing = vss::deal(secret, self.ell, self.count() as u32, &mut self.rng)
            .expect("roster size exceeds threshold by construction");
        // Self-delivery is immediate; the wire only carries the rest.
        self.deals.insert(
            self.id,
            (
                dealing.shares[self.my_index as usize - 1],
                dealing.commitments.clone(),
            ),
        );
        let out = self
            .roster
            .iter()
            .filter(|&&v| v != self.id)
            .map(|&v| {
                let idx = self.index_of(v).unwrap();
                self.sign(
                    DkgDest::One(v),
                    DkgBody::Deal {
                        share: dealing.shares[idx as usize - 1],
                        commitments: dealing.commitments.clone(),
                    },
                )
            })
            .collect();
        self.dealing = Some(dealing);
        self.phase = DkgPhase::Verify;
        out
    }

    fn step_verify(&mut self, inbox: Vec<DkgMessage>) -> Vec<DkgMessage> {
        for msg in inbox {
            let DkgBody::Deal {
                share,
                commitments,
            } = msg.body
            else {
                continue;
            };
            if share.index != self.my_index || commitments.len() != self.ell as usize + 1 {
                continue;
            }
            self.deals.entry(msg.from).or_insert((share, commitments));
        }

        let allowed_missing = (self.delta_d * self.count() as f64).floor() as usize;
        let need = self.count() - allowed_missing;
        if self.deals.len() < need {
            return self.abort(DkgAbort::InsufficientDealings {
                got: self.deals.len(),
                need,
            });
        }

        // Complain about bad shares and about dealers that never dealt to us.
        let mut out = Vec::new();
        let mut grievances: Vec<ClientId> = Vec::new();
        for &dealer in &self.roster {
            match self.deals.get(&dealer) {
                Some((share, commitments)) => {
                    if !vss::pedersen_verify(share, commitments) {
                        grievances.push(dealer);
                    }
                }
                None => grievances.push(dealer),
            }
        }
        for dealer in grievances {
            self.deals.remove(&dealer);
            self.complaints.insert((self.id, dealer));
            out.push(self.sign(DkgDest::All, DkgBody::Complaint { dealer }));
        }
        self.phase = DkgPhase::Reveal;
        out
    }

    fn step_reveal(&mut self, inbox: Vec<DkgMessage>) -> Vec<DkgMessage> {
        for msg in inbox {
            let DkgBody::Complaint { dealer } = msg.body else {
                continue;
            };
            if self.roster.binary_search(&dealer).is_ok() {
                self.complaints.insert((msg.from, dealer));
            }
        }

        // Answer complaints against us by revealing the complainer's pair.
        let mut out = Vec::new();
        let mut answered = Vec::new();
        if let Some(dealing) = &self.dealing {
            for &(complainer, dealer) in &self.complaints {
                if dealer != self.id {
                    continue;
                }
                let Some(idx) = self.index_of(complainer) else {
                    continue;
                };
                answered.push((complainer, self.id));
                out.push(self.sign(
                    DkgDest::All,
                    DkgBody::Reveal {
                        complainer,
                        share: dealing.shares[idx as usize - 1],
                        commitments: dealing.commitments.clone(),
                    },
                ));
            }
        }
        self.resolved.extend(answered);
        self.phase = DkgPhase::Qualify;
        out
    }

    fn step_qualify(&mut self, inbox: Vec<DkgMessage>) -> Vec<DkgMessage> {
        // Track which complaints each dealer answered with a verifying
        // reveal, and adopt our own share from a reveal if we lacked one.
        for msg in inbox {
            let DkgBody::Reveal {
                complainer,
                share,
                commitments,
            } = msg.body
            else {
                continue;
            };
            let dealer = msg.from;
            let Some(cidx) = self.index_of(complainer) else {
                continue;
            };
            if share.index != cidx
                || commitments.len() != self.ell as usize + 1
                || !vss::pedersen_verify(&share, &commitments)
            {
                continue;
            }
            // A dealer that answers with different commitments than it dealt
            // is equivocating; its reveal resolves nothing for us.
            if let Some((_, ours)) = self.deals.get(&dealer) {
                if *ours != commitments {
                    continue;
                }
            }
            self.resolved.insert((complainer, dealer));
            if complainer == self.id && !self.deals.contains_key(&dealer) {
                self.deals.insert(dealer, (share, commitments));
            }
        }

        // Disqualify: too many complaints, or any complaint left standing.
        let quorum = self.quorum();
        let mut qual = Vec::new();
        for &dealer in &self.roster {
            if !self.deals.contains_key(&dealer) {
                continue;
            }
            let against: Vec<ClientId> = self
                .complaints
                .iter()
                .filter(|&&(_, d)| d == dealer)
                .map(|&(c, _)| c)
                .collect();
            if against.len() >= quorum {
                continue;
            }
            if against
                .iter()
                .any(|&c| !self.resolved.contains(&(c, dealer)))
            {
                continue;
            }
            qual.push(dealer);
        }
        if qual.len() < self.ell as usize + 1 {
            return self.abort(DkgAbort::QualTooSmall {
                got: qual.len(),
                need: self.ell as usize + 1,
            });
        }
        self.qual = qual;
        let body = DkgBody::Qual {
            qual: self.qual.clone(),
        };
        self.phase = DkgPhase::CrossCheck;
        vec![self.sign(DkgDest::All, body)]
    }

    fn step_cross_check(&mut self, inbox: Vec<DkgMessage>) -> Vec<DkgMessage> {
        let mut votes: BTreeMap<ClientId, Vec<ClientId>> = BTreeMap::new();
        votes.insert(self.id, self.qual.clone());
        for msg in inbox {
            let DkgBody::Qual { qual } = msg.body else {
                continue;
            };
            votes.entry(msg.from).or_insert(qual);
        }
        let matching = votes.values().filter(|q| **q == self.qual).count();
        if matching < self.quorum() {
            let mut tally: BTreeMap<&[ClientId], usize> = BTreeMap::new();
            for q in votes.values() {
                *tally.entry(q.as_slice()).or_default() += 1;
            }
            let best = tally.values().copied().max().unwrap_or(0);
            return self.abort(DkgAbort::QualDisagreement {
                best,
                need: self.quorum(),
            });
        }

        let mut out = Vec::new();
        if self.qual.contains(&self.id) {
            let feldman = self
                .dealing
                .as_ref()
                .expect("qualified dealers dealt")
                .feldman
                .clone();
            out.push(self.sign(DkgDest::All, DkgBody::Feldman { feldman }));
        }
        self.phase = DkgPhase::FeldmanReveal;
        out
    }

    fn step_feldman_reveal(&mut self, inbox: Vec<DkgMessage>) -> Vec<DkgMessage> {
        for msg in inbox {
            let DkgBody::Feldman { feldman } = msg.body else {
                continue;
            };
            if self.qual.contains(&msg.from) && feldman.len() == self.ell as usize + 1 {
                self.feldman.entry(msg.from).or_insert(feldman);
            }
        }
        if self.qual.contains(&self.id) {
            let feldman = self
                .dealing
                .as_ref()
                .expect("qualified dealers dealt")
                .feldman
                .clone();
            self.feldman.insert(self.id, feldman);
        }

        // Check every qualified dealer's share against its revealed
        // polynomial; a miss (or a missing reveal) becomes public evidence.
        let mut out = Vec::new();
        for &dealer in &self.qual.clone() {
            let share = self.deals[&dealer].0;
            let consistent = self
                .feldman
                .get(&dealer)
                .is_some_and(|f| vss::feldman_verify(self.my_index, &share.value, f));
            if !consistent {
                self.fcomplaints
                    .entry(dealer)
                    .or_default()
                    .insert(self.id, share);
                out.push(self.sign(DkgDest::All, DkgBody::FeldmanComplaint { dealer, share }));
            }
        }
        self.phase = DkgPhase::FeldmanCheck;
        out
    }

    fn step_feldman_check(&mut self, inbox: Vec<DkgMessage>) -> Vec<DkgMessage> {
        for msg in inbox {
            let DkgBody::FeldmanComplaint { dealer, share } = msg.body else {
                continue;
            };
            // Valid evidence: the complainer's own commitment-consistent
            // share that misses the dealer's revealed polynomial.
            if Some(share.index) != self.index_of(msg.from) || !self.qual.contains(&dealer) {
                continue;
            }
            let Some((_, commitments)) = self.deals.get(&dealer) else {
                continue;
            };
            if !vss::pedersen_verify(&share, commitments) {
                continue;
            }
            let off_poly = match self.feldman.get(&dealer) {
                Some(f) => !vss::feldman_verify(share.index, &share.value, f),
                None => true,
            };
            if off_poly {
                self.fcomplaints
                    .entry(dealer)
                    .or_default()
                    .insert(msg.from, share);
            }
        }
        self.phase = DkgPhase::Finish;
        Vec::new()
    }

    fn step_finish(&mut self, _inbox: Vec<DkgMessage>) -> Vec<DkgMessage> {
        // Per qualified dealer: either its Feldman vector stands, or valid
        // evidence condemned it and we rebuild its polynomial from the
        // published shares (ours included). Either way we end with g^{p_u(x)}
        // for every roster position.
        let count = self.count();
        let mut pk = GroupElement::identity();
        let mut registered = vec![GroupElement::identity(); count];
        for &dealer in &self.qual.clone() {
            let condemned = self.fcomplaints.get(&dealer).is_some_and(|m| !m.is_empty());
            if condemned {
                let mut pool: Vec<Share> = self.fcomplaints[&dealer]
                    .values()
                    .map(|s| Share {
                        index: s.index,
                        value: s.value,
                    })
                    .collect();
                let own = self.deals[&dealer].0;
                if !pool.iter().any(|s| s.index == own.index) {
                    pool.push(Share {
                        index: own.index,
                        value: own.value,
                    });
                }
                if pool.len() < self.ell as usize + 1 {
                    return self.abort(DkgAbort::Reconstruction(dealer, pool.len()));
                }
                pk = pk + GroupElement::mul_base(
                    &interpolate_at(&pool, self.ell, 0).expect("pool size checked"),
                );
                for (j, slot) in registered.iter_mut().enumerate() {
                    let eval = interpolate_at(&pool, self.ell, j as u32 + 1)
                        .expect("pool size checked");
                    *slot = *slot + GroupElement::mul_base(&eval);
                }
            } else {
                let feldman = &self.feldman[&dealer];
                pk = pk + feldman[0];
                for (j, slot) in registered.iter_mut().enumerate() {
                    *slot = *slot + vss::feldman_eval(j as u32 + 1, feldman);
                }
            }
        }

        let value: Scalar = self
            .qual
            .iter()
            .map(|d| self.deals[d].0.value)
            .sum();
        self.outcome = Some(DkgOutcome::Finished(DkgResult {
            share: Share {
                index: self.my_index,
                value,
            },
            qual: self.qual.clone(),
            pk,
            registered,
        }));
        self.phase = DkgPhase::Done;
        vec![self.sign(DkgDest::All, DkgBody::Pk { pk })]
    }
}
