//! The message pool: a priority queue of deliveries ordered by (time, seq).
//!
//! Every exchange in the protocol is a star-topology hop, so an event is one
//! message in flight between a client and the server. Parties never process
//! events as they arrive; the world drains the pool at each step deadline and
//! anything bearing an older phase tag — or a drop flag set by an adversary
//! hook — is handed to the audit as "seen but never processed". That is the
//! waiting-period rule: a message arriving after its step deadline does not
//! exist for that step.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use aggsum_core::dkg::{DkgMessage, TransferMessage};
use aggsum_core::protocol::{
    DecryptionRequest, DecryptorResponse, MaskedVector, RequestBundle, SignedRequest,
};
use aggsum_core::ClientId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Party {
    Server,
    Client(ClientId),
}

/// One decryptor's reconstruction-step download: every signed request the
/// server gathered plus the evidence bundle to act on.
#[derive(Clone, Debug)]
pub struct ReconPacket {
    pub votes: Vec<SignedRequest>,
    pub bundle: RequestBundle,
}

#[derive(Clone, Debug)]
pub enum Payload {
    Report(MaskedVector),
    Request(DecryptionRequest),
    Vote(SignedRequest),
    Recon(Box<ReconPacket>),
    Response(Box<DecryptorResponse>),
    Dkg(DkgMessage),
    Transfer(TransferMessage),
}

#[derive(Debug)]
pub struct SimEvent {
    pub at_us: u64,
    pub seq: u64,
    /// Which waiting period this message belongs to.
    pub phase: u64,
    pub from: Party,
    pub to: Party,
    pub payload: Payload,
    /// Canonical encoded size, for the byte ledgers.
    pub wire_len: usize,
    /// Set by an adversary hook: the message was sent but suppressed in
    /// flight. It still reaches the audit's visibility bookkeeping.
    pub dropped: bool,
    /// Set by an adversary hook: the payload differs from what an honest
    /// sender produced.
    pub tampered: bool,
}

impl PartialEq for SimEvent {
    fn eq(&self, other: &Self) -> bool {
        self.at_us == other.at_us && self.seq == other.seq
    }
}
impl Eq for SimEvent {}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SimEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; invert so earlier (time, seq) pops first.
        (other.at_us, other.seq).cmp(&(self.at_us, self.seq))
    }
}

#[derive(Default)]
pub struct EventQueue {
    heap: BinaryHeap<SimEvent>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        EventQueue::default()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        at_us: u64,
        phase: u64,
        from: Party,
        to: Party,
        payload: Payload,
        wire_len: usize,
        dropped: bool,
        tampered: bool,
    ) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(SimEvent {
            at_us,
            seq,
            phase,
            from,
            to,
            payload,
            wire_len,
            dropped,
            tampered,
        });
    }

    /// Pop the single next event in (time, seq) order.
    pub fn advance(&mut self) -> Option<SimEvent> {
        self.heap.pop()
    }

    /// Drain everything due at or before `deadline`, in delivery order.
    pub fn drain_until(&mut self, deadline: u64) -> Vec<SimEvent> {
        let mut out = Vec::new();
        while let Some(ev) = self.heap.peek() {
            if ev.at_us > deadline {
                break;
            }
            out.push(self.heap.pop().expect("peeked"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dummy(q: &mut EventQueue, at: u64, phase: u64) {
        q.push(
            at,
            phase,
            Party::Server,
            Party::Client(0),
            Payload::Request(DecryptionRequest {
                t: 1,
                labels: Vec::new(),
            }),
            10,
            false,
            false,
        );
    }

    #[test]
    fn pops_in_time_then_seq_order() {
        let mut q = EventQueue::new();
        dummy(&mut q, 30, 0);
        dummy(&mut q, 10, 0);
        dummy(&mut q, 10, 0);
        dummy(&mut q, 20, 0);
        let order: Vec<(u64, u64)> = std::iter::from_fn(|| q.advance())
            .map(|e| (e.at_us, e.seq))
            .collect();
        assert_eq!(order, vec![(10, 1), (10, 2), (20, 3), (30, 0)]);
    }

    #[test]
    fn drain_respects_the_deadline() {
        let mut q = EventQueue::new();
        dummy(&mut q, 5, 0);
        dummy(&mut q, 15, 0);
        dummy(&mut q, 25, 1);
        let first = q.drain_until(15);
        assert_eq!(first.len(), 2);
        assert_eq!(q.len(), 1);
        let rest = q.drain_until(u64::MAX);
        assert_eq!(rest.len(), 1);
        assert_eq!(rest[0].phase, 1);
    }
}
