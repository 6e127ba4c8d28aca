//! Adversary scripts: a static corruption set plus scripted misbehavior.
//!
//! The adversary is fixed before the session starts and never adapts. Its
//! only levers are the three hook points the world exposes — on-send (a
//! corrupted party rewrites its own outgoing message, re-signing with its own
//! key), on-route (a corrupted server reorders, forks, suppresses, or
//! replays what it relays), and on-deliver (suppression toward a chosen
//! recipient). Everything a script does is replayable because the hooks are
//! driven by the same seeded run as the rest of the world.

use std::collections::BTreeSet;

use aggsum_core::ClientId;

/// What the server does with the traffic it routes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ServerBehavior {
    Honest,
    /// Collection: show half the decryptors a different online/offline
    /// labeling for one client. The cross-check must starve the quorum.
    EquivocateLabels,
    /// Collection: plant the previous round's pairwise-ciphertext
    /// attachments into the current bundle. Decryptors must skip them.
    ReplayCrossRound,
    /// Setup: relay the dealings, then stop carrying qualification traffic
    /// across the middle of the committee. Each half sees only its own
    /// votes, so no view can gather 2ℓ+1 matching ones and every honest
    /// party must abort rather than adopt a half-agreed key.
    SplitQual,
    /// Drop every nth message the server would send, across the session.
    DropMessages { every_nth: u64 },
}

/// What corrupted clients do (honest-but-counted is the default: they follow
/// the protocol, and only their key material feeds the audit's visibility).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClientBehavior {
    Honest,
    /// Corrupted dealers send Pedersen-invalid shares to `victims` during
    /// setup (an empty set means every recipient); with `honest_reveal` they
    /// answer the complaints correctly and stay qualified, without it they
    /// stonewall and are disqualified.
    BadShares {
        victims: BTreeSet<ClientId>,
        honest_reveal: bool,
    },
    /// Corrupted decryptors shift every partial decryption they emit; their
    /// attached proofs no longer verify.
    BadPartials,
}

#[derive(Clone, Debug)]
pub struct AdversaryScript {
    /// Corrupted clients by id, fixed for the whole session.
    pub corrupted: BTreeSet<ClientId>,
    /// Corrupted clients by committee position, resolved against the elected
    /// roster at setup (the set is still static: election is public coin).
    pub corrupt_committee_slots: Vec<usize>,
    pub server: ServerBehavior,
    pub clients: ClientBehavior,
}

impl AdversaryScript {
    pub fn honest() -> Self {
        AdversaryScript {
            corrupted: BTreeSet::new(),
            corrupt_committee_slots: Vec::new(),
            server: ServerBehavior::Honest,
            clients: ClientBehavior::Honest,
        }
    }

    pub fn server_is_corrupt(&self) -> bool {
        self.server != ServerBehavior::Honest
    }
}

impl Default for AdversaryScript {
    fn default() -> Self {
        AdversaryScript::honest()
    }
}
