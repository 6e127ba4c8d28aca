//! Transcript audit: can the adversary reassemble any honest input?
//!
//! A reported vector is protected by two independent layers: the client's
//! individual mask seed (Shamir-shared across the committee, sealed per
//! decryptor) and its pairwise mask seeds (one per graph neighbor, each
//! recoverable only from that neighbor or from a threshold decryption of the
//! served ciphertext). The protocol deliberately exposes one layer per
//! client — the individual seed for online clients, the pairwise seeds for
//! offline ones — so the fatal trace is the one where *both* layers of the
//! same honest client fall inside the adversary's view. The audit replays
//! every round's visibility and asserts that trace never exists.
//!
//! Visibility rules, applied to what was actually sent:
//! - a corrupted decryptor reads its own sealed share of any served bundle
//!   and can compute its own partial for any served ciphertext;
//! - a corrupted server additionally reads every plaintext share and partial
//!   that honest decryptors returned in their responses — including late or
//!   suppressed traffic, which it saw even if the protocol never used it;
//! - a corrupted neighbor knows the pairwise seed outright, no decryption
//!   needed.

use std::collections::{BTreeMap, BTreeSet};

use aggsum_core::{ClientId, Round};

pub struct RoundVisibility {
    pub t: Round,
    pub committee: Vec<ClientId>,
    /// Cohort members whose report the server received (in time or not).
    pub reported: BTreeSet<ClientId>,
    /// Graph neighbors of each reporter.
    pub neighbors: BTreeMap<ClientId, Vec<ClientId>>,
    /// The labeling the server requested (empty if the round died earlier).
    pub online_labels: BTreeSet<ClientId>,
    /// (owner, reporter) pairs whose ciphertext was served to decryptors.
    pub served_pairs: Vec<(ClientId, ClientId)>,
    /// Decryptors whose response reached the wire.
    pub responders: BTreeSet<ClientId>,
    /// Whether the evidence bundle was distributed at all this round.
    pub bundle_served: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditViolation {
    pub t: Round,
    pub client: ClientId,
}

#[derive(Clone, Debug, Default)]
pub struct AuditReport {
    pub rounds_checked: usize,
    pub clients_checked: usize,
    pub violations: Vec<AuditViolation>,
}

impl AuditReport {
    pub fn clean(&self) -> bool {
        self.violations.is_empty()
    }
}

pub struct AuditLog {
    corrupted: BTreeSet<ClientId>,
    server_corrupt: bool,
    ell: u32,
    rounds: Vec<RoundVisibility>,
}

impl AuditLog {
    pub fn new(ell: u32, server_corrupt: bool) -> Self {
        AuditLog {
            corrupted: BTreeSet::new(),
            server_corrupt,
            ell,
            rounds: Vec::new(),
        }
    }

    /// The corruption set is static but only fully known once the committee
    /// election resolves position-based corruptions.
    pub fn set_corrupted(&mut self, corrupted: BTreeSet<ClientId>) {
        self.corrupted = corrupted;
    }

    pub fn corrupted(&self) -> &BTreeSet<ClientId> {
        &self.corrupted
    }

    pub fn record_round(&mut self, vis: RoundVisibility) {
        self.rounds.push(vis);
    }

    /// Decryptor share-or-partial exposure for one served item: corrupted
    /// committee members always count for themselves; a corrupted server
    /// adds every honest responder's plaintext contribution.
    fn exposed_committee(&self, vis: &RoundVisibility) -> BTreeSet<ClientId> {
        let mut exposed: BTreeSet<ClientId> = vis
            .committee
            .iter()
            .copied()
            .filter(|u| self.corrupted.contains(u))
            .collect();
        if self.server_corrupt {
            exposed.extend(vis.responders.iter().copied());
        }
        exposed
    }

    pub fn finish(&self) -> AuditReport {
        let need = self.ell as usize + 1;
        let mut report = AuditReport {
            rounds_checked: self.rounds.len(),
            ..AuditReport::default()
        };
        for vis in &self.rounds {
            let exposed = self.exposed_committee(vis);
            let served: BTreeSet<(ClientId, ClientId)> =
                vis.served_pairs.iter().copied().collect();
            for &i in vis.reported.iter().filter(|i| !self.corrupted.contains(i)) {
                report.clients_checked += 1;
                let mask_exposed = vis.bundle_served
                    && exposed.len() >= need
                    && (!self.server_corrupt || vis.online_labels.contains(&i) || {
                        // with only corrupted decryptors the sealed shares
                        // fall regardless of the labeling
                        vis.committee
                            .iter()
                            .filter(|u| self.corrupted.contains(u))
                            .count()
                            >= need
                    });
                if !mask_exposed {
                    continue;
                }
                let neighbors = vis.neighbors.get(&i).map(Vec::as_slice).unwrap_or(&[]);
                let all_pairs_exposed = neighbors.iter().all(|&j| {
                    self.corrupted.contains(&j)
                        || ((served.contains(&(i, j)) || served.contains(&(j, i)))
                            && exposed.len() >= need)
                });
                if all_pairs_exposed {
                    report.violations.push(AuditViolation { t: vis.t, client: i });
                }
            }
        }
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_round() -> RoundVisibility {
        RoundVisibility {
            t: 1,
            committee: vec![100, 101, 102, 103],
            reported: [1, 2, 3].into_iter().collect(),
            neighbors: [(1, vec![2, 3]), (2, vec![1, 3]), (3, vec![1, 2])]
                .into_iter()
                .collect(),
            online_labels: [1, 2, 3].into_iter().collect(),
            served_pairs: Vec::new(),
            responders: [100, 101, 102, 103].into_iter().collect(),
            bundle_served: true,
        }
    }

    #[test]
    fn honest_world_is_clean() {
        let mut log = AuditLog::new(1, false);
        log.record_round(base_round());
        let report = log.finish();
        assert!(report.clean());
        assert_eq!(report.clients_checked, 3);
    }

    #[test]
    fn corrupt_server_alone_cannot_pair_the_masks() {
        // Individual masks of online clients fall to a corrupt server via the
        // plaintext responses, but no pairwise ciphertext was served.
        let mut log = AuditLog::new(1, true);
        log.record_round(base_round());
        assert!(log.finish().clean());
    }

    #[test]
    fn both_layers_visible_is_flagged() {
        // Client 1 online (mask shares recovered in plaintext, server
        // corrupt) while both its pairwise ciphertexts got served: broken.
        let mut log = AuditLog::new(1, true);
        let mut vis = base_round();
        vis.served_pairs = vec![(2, 1), (3, 1)];
        log.record_round(vis);
        let report = log.finish();
        assert_eq!(
            report.violations,
            vec![AuditViolation { t: 1, client: 1 }]
        );
    }

    #[test]
    fn corrupted_neighbors_expose_pairs_without_serving() {
        let mut log = AuditLog::new(1, true);
        log.set_corrupted([2, 3].into_iter().collect());
        log.record_round(base_round());
        // client 1's only neighbors are corrupted: its pairwise layer is
        // gone, and the corrupt server recovers its individual mask.
        let report = log.finish();
        assert_eq!(
            report.violations,
            vec![AuditViolation { t: 1, client: 1 }]
        );
        // corrupted clients themselves are not audited
        assert_eq!(report.clients_checked, 1);
    }

    #[test]
    fn threshold_of_corrupt_decryptors_breaks_offline_clients() {
        // ℓ+1 corrupted committee members open sealed shares and compute
        // partials by themselves; an offline client with every pair served
        // loses both layers even with an honest server.
        let mut log = AuditLog::new(1, false);
        log.set_corrupted([100, 101].into_iter().collect());
        let mut vis = base_round();
        vis.online_labels.remove(&1);
        vis.served_pairs = vec![(1, 2), (1, 3)];
        log.record_round(vis);
        let report = log.finish();
        assert_eq!(
            report.violations,
            vec![AuditViolation { t: 1, client: 1 }]
        );
    }
}
