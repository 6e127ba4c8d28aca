//! The world: every party's state, the virtual clock, and the star router.
//!
//! A session is a fixed sequence of waiting periods. Setup runs the committee
//! election and the DKG (one waiting period per DKG step, each a
//! party → server → party relay), then the signed-key distribution. Every
//! collection round is three exchanges — reports up, requests down / signed
//! requests up, evidence down / responses up — and the server only ever
//! processes a step's pool at that step's deadline. Decryptor hand-over runs
//! between rounds on the same relay pattern.
//!
//! Determinism: every random choice (keys, masks, delays, dropout draws)
//! comes from a named ChaCha stream derived from the master seed, and all
//! iteration is in roster or arrival order, so identical parameters replay
//! byte-identical sessions. Adversary hooks fire at three fixed points —
//! on-send, on-route, on-deliver — and are driven by the same streams.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use aggsum_core::crypto::group::{FixedBaseTable, GroupElement, Scalar};
use aggsum_core::crypto::prf::{prf, prf_round};
use aggsum_core::crypto::prg::prg_words;
use aggsum_core::crypto::shamir::Share;
use aggsum_core::crypto::Seed;
use aggsum_core::dkg::{
    deal_transfer, dkg_body_bytes, dkg_message_len, transfer_message_len, DkgBody, DkgDest,
    DkgMessage, DkgOutcome, DkgParty, TransferMessage, TransferOutcome, TransferParty,
};
use aggsum_core::graph::choose_set;
use aggsum_core::params::{ProtocolConfig, Violation};
use aggsum_core::protocol::{
    client_report, cross_check, server_collect, server_finalize, sign_request, wire, CheckAbort,
    ClientKeys, ClientSession, DecryptionRequest, DecryptorResponse, Directory, FinalizeAbort,
    Label, MaskedVector, OfflineAttachment, SessionContext, SignedRequest,
};
use aggsum_core::{parallel, ClientId, Round};

use crate::adversary::{AdversaryScript, ClientBehavior, ServerBehavior};
use crate::audit::{AuditLog, AuditReport, RoundVisibility};
use crate::delay::DelayModel;
use crate::event::{EventQueue, Party, Payload, ReconPacket, SimEvent};
use crate::metrics::{
    AbortReason, Outcome, RoundMetrics, SetupMetrics, TransferMetrics, CSV_HEADER,
};
use crate::trace;

#[derive(Clone, Debug)]
pub struct SimParams {
    pub config: ProtocolConfig,
    pub seed: u64,
    /// Decryptors attach proofs of correct decryption; the server excludes
    /// any decryptor whose proof fails.
    pub robust: bool,
    /// Optional per-session model digest mixed into the pairwise mask seeds.
    pub model_hash: Option<Vec<u8>>,
    pub delay: DelayModel,
    pub adversary: AdversaryScript,
    pub dropouts: DropoutPlan,
    pub capture_trace: bool,
}

impl SimParams {
    pub fn honest(config: ProtocolConfig, seed: u64) -> Self {
        SimParams {
            config,
            seed,
            robust: false,
            model_hash: None,
            delay: DelayModel::default(),
            adversary: AdversaryScript::honest(),
            dropouts: DropoutPlan::Random,
            capture_trace: false,
        }
    }
}

#[derive(Clone, Debug)]
pub enum DropoutPlan {
    None,
    /// Each round, an independent draw: 0..=⌊δ·n⌋ cohort members miss the
    /// report step and 0..=⌊δ_D·L⌋ committee members sit the round out.
    Random,
    /// Exact per-round dropout sets, index = round − 1.
    Scripted(Vec<RoundDropouts>),
}

#[derive(Clone, Debug, Default)]
pub struct RoundDropouts {
    pub reporters: BTreeSet<ClientId>,
    pub decryptors: BTreeSet<ClientId>,
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("configuration invalid: {0:?}")]
    Config(Vec<Violation>),
    #[error("world setup failed: {0}")]
    Setup(String),
}

/// Reasons a whole session stops early. Round-level aborts are data in the
/// metrics; these are not.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SessionAbort {
    #[error("key distribution: {got} of {need} matching signed confirmations")]
    PkQuorum { got: usize, need: usize },
    #[error("hand-over after round {after}: {holders} of {need} new holders hold a share")]
    Transfer {
        after: Round,
        holders: usize,
        need: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SessionOutcome {
    Completed,
    Aborted(SessionAbort),
}

#[derive(Debug)]
pub struct SessionReport {
    pub outcome: SessionOutcome,
    pub setup: SetupMetrics,
    pub rounds: Vec<RoundMetrics>,
    pub transfers: Vec<TransferMetrics>,
    pub audit: AuditReport,
    /// Binary event log; empty unless trace capture was requested.
    pub trace: Vec<u8>,
}

impl SessionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rounds {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }
}

/// Run one full session: setup, T rounds, periodic hand-over.
pub fn run_session(params: SimParams) -> Result<SessionReport, SimError> {
    let rounds = params.config.rounds;
    let period = params.config.transfer_period;
    let mut world = World::new(params)?;
    if let Err(abort) = world.setup() {
        return Ok(world.finish(SessionOutcome::Aborted(abort)));
    }
    for t in 1..=rounds {
        world.run_round(t);
        if period > 0 && t % period == 0 && t < rounds {
            if let Err(abort) = world.run_transfer(t) {
                return Ok(world.finish(SessionOutcome::Aborted(abort)));
            }
        }
    }
    Ok(world.finish(SessionOutcome::Completed))
}

/// The committee actually holding shares right now.
struct CommitteeState {
    epoch: u64,
    members: Vec<ClientId>,
    shares: BTreeMap<ClientId, Share>,
    registered: Vec<GroupElement>,
}

/// Per-round byte and message ledger.
#[derive(Default)]
struct Ledger {
    server_in: u64,
    server_out: u64,
    client_bytes: BTreeMap<ClientId, u64>,
    client_msgs: BTreeMap<ClientId, u32>,
}

impl Ledger {
    fn client_sent(&mut self, id: ClientId, len: usize) {
        *self.client_bytes.entry(id).or_default() += len as u64;
        *self.client_msgs.entry(id).or_default() += 1;
        self.server_in += len as u64;
    }

    fn server_sent(&mut self, to: ClientId, len: usize) {
        *self.client_bytes.entry(to).or_default() += len as u64;
        self.server_out += len as u64;
    }
}

pub struct World {
    params: SimParams,
    dir: Directory,
    sessions: Vec<ClientSession>,
    sctx: SessionContext,
    pk_table: Option<FixedBaseTable>,
    committee: CommitteeState,
    beacon_committee: Seed,
    inputs_base: Seed,
    report_rng_base: Seed,
    respond_rng_base: Seed,
    dkg_rng_base: Seed,
    time_us: u64,
    phase_ctr: u64,
    queue: EventQueue,
    rng_delay: ChaCha20Rng,
    rng_sched: ChaCha20Rng,
    audit: AuditLog,
    trace_buf: Vec<u8>,
    ledger: Ledger,
    setup_metrics: SetupMetrics,
    round_metrics: Vec<RoundMetrics>,
    transfer_metrics: Vec<TransferMetrics>,
    /// Last round's honest attachments, for the replay script.
    prev_attachments: Vec<OfflineAttachment>,
    /// Running counter for the drop-every-nth script.
    route_ctr: u64,
    /// Setup outcomes per committee member, for inspection by tests.
    dkg_outcomes: Vec<(ClientId, DkgSummary)>,
}

/// What a committee member walked away from setup with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DkgSummary {
    Finished { qual: Vec<ClientId>, pk: GroupElement },
    Aborted(String),
}

impl World {
    pub fn new(params: SimParams) -> Result<Self, SimError> {
        let violations = params.config.validate();
        if !violations.is_empty() {
            return Err(SimError::Config(violations));
        }
        let cfg = &params.config;

        let mut master = ChaCha20Rng::seed_from_u64(params.seed);
        let mut seed32 = || {
            let mut b = [0u8; 32];
            master.fill(&mut b);
            b
        };
        let keys_seed = seed32();
        let beacon_graph = Seed::from_bytes(seed32());
        let beacon_committee = Seed::from_bytes(seed32());
        let inputs_base = Seed::from_bytes(seed32());
        let report_rng_base = Seed::from_bytes(seed32());
        let respond_rng_base = Seed::from_bytes(seed32());
        let dkg_rng_base = Seed::from_bytes(seed32());
        let delay_seed = seed32();
        let sched_seed = seed32();

        let mut keys_rng = ChaCha20Rng::from_seed(keys_seed);
        let keys: Vec<ClientKeys> = (0..cfg.n_total)
            .map(|id| ClientKeys::generate(id, &mut keys_rng))
            .collect();
        let dir = Directory::publish(&keys);
        let sessions: Vec<ClientSession> = keys.into_iter().map(ClientSession::new).collect();

        let members = choose_set(&beacon_committee, 0, cfg.decryptors, cfg.n_total)
            .map_err(|e| SimError::Setup(e.to_string()))?;

        let mut corrupted = params.adversary.corrupted.clone();
        for &slot in &params.adversary.corrupt_committee_slots {
            if let Some(&id) = members.get(slot) {
                corrupted.insert(id);
            }
        }
        let mut audit = AuditLog::new(cfg.ell, params.adversary.server_is_corrupt());
        audit.set_corrupted(corrupted);

        let sctx = SessionContext {
            config: cfg.clone(),
            v: beacon_graph,
            pk: GroupElement::identity(),
            decryptors: members.clone(),
            model_hash: params.model_hash.clone(),
        };

        Ok(World {
            dir,
            sessions,
            sctx,
            pk_table: None,
            committee: CommitteeState {
                epoch: 0,
                members,
                shares: BTreeMap::new(),
                registered: Vec::new(),
            },
            beacon_committee,
            inputs_base,
            report_rng_base,
            respond_rng_base,
            dkg_rng_base,
            time_us: 0,
            phase_ctr: 0,
            queue: EventQueue::new(),
            rng_delay: ChaCha20Rng::from_seed(delay_seed),
            rng_sched: ChaCha20Rng::from_seed(sched_seed),
            audit,
            trace_buf: Vec::new(),
            ledger: Ledger::default(),
            setup_metrics: SetupMetrics::default(),
            round_metrics: Vec::new(),
            transfer_metrics: Vec::new(),
            prev_attachments: Vec::new(),
            route_ctr: 0,
            dkg_outcomes: Vec::new(),
            params,
        })
    }

    pub fn committee(&self) -> &[ClientId] {
        &self.committee.members
    }

    /// Round `t`'s cohort, for scripting dropouts against real members.
    pub fn cohort(&self, t: Round) -> Vec<ClientId> {
        self.sctx
            .round_context(t)
            .choose_set()
            .expect("config validated at construction")
    }

    pub fn public_key(&self) -> GroupElement {
        self.sctx.pk
    }

    pub fn corrupted(&self) -> &BTreeSet<ClientId> {
        self.audit.corrupted()
    }

    pub fn dkg_outcomes(&self) -> &[(ClientId, DkgSummary)] {
        &self.dkg_outcomes
    }

    /// Current shares, for invariant checks in tests.
    pub fn committee_shares(&self) -> Vec<Share> {
        self.committee.shares.values().cloned().collect()
    }

    pub fn input_for(&self, id: ClientId, t: Round) -> Vec<u32> {
        let per_client = prf(&self.inputs_base, &id.to_be_bytes());
        prg_words(&prf_round(&per_client, t), self.params.config.dim as usize)
    }

    pub fn oracle_sum(&self, included: &[ClientId], t: Round) -> Vec<u32> {
        let mut acc = vec![0u32; self.params.config.dim as usize];
        for &id in included {
            for (a, x) in acc.iter_mut().zip(self.input_for(id, t)) {
                *a = a.wrapping_add(x);
            }
        }
        acc
    }

    fn next_phase(&mut self) -> u64 {
        self.phase_ctr += 1;
        self.phase_ctr
    }

    fn trace_event(&mut self, ev: &SimEvent, late: bool) {
        if !self.params.capture_trace {
            return;
        }
        let (kind, payload) = encode_payload(&ev.payload);
        let rec = trace::record_for(ev, kind, payload, late);
        trace::append(&mut self.trace_buf, &rec);
    }

    /// Client → server leg: enqueue for the pool, ledger the bytes.
    fn send_up(&mut self, send_us: u64, phase: u64, from: ClientId, payload: Payload) {
        let len = payload_len(&payload);
        self.ledger.client_sent(from, len);
        let at = send_us + self.params.delay.sample(&mut self.rng_delay);
        self.queue
            .push(at, phase, Party::Client(from), Party::Server, payload, len, false, false);
    }

    /// Server → client leg: clients act on arrival, so this records the
    /// delivery immediately and returns the arrival time. `dropped` models
    /// the server choosing not to send (no bytes move, audit still sees the
    /// decision's object through the server's own view).
    fn send_down(&mut self, send_us: u64, from_server_to: ClientId, payload: Payload, dropped: bool, tampered: bool) -> Option<u64> {
        let len = payload_len(&payload);
        let at = send_us + self.params.delay.sample(&mut self.rng_delay);
        let ev = SimEvent {
            at_us: at,
            seq: 0,
            phase: 0,
            from: Party::Server,
            to: Party::Client(from_server_to),
            payload,
            wire_len: len,
            dropped,
            tampered,
        };
        self.trace_event(&ev, false);
        if dropped {
            return None;
        }
        self.ledger.server_sent(from_server_to, len);
        Some(at)
    }

    /// Drain the pool at a deadline. Accepted events are the current phase's
    /// in-time, un-dropped deliveries in arrival order; everything else is
    /// logged (the audit saw it) and discarded.
    fn drain_pool(&mut self, deadline: u64, phase: u64) -> Vec<SimEvent> {
        let mut accepted = Vec::new();
        for ev in self.queue.drain_until(deadline) {
            let late = ev.phase != phase;
            self.trace_event(&ev, late);
            if !late && !ev.dropped {
                accepted.push(ev);
            }
        }
        accepted
    }

    /// Whether the routing adversary suppresses this relayed message.
    fn route_drops(&mut self) -> bool {
        self.route_ctr += 1;
        match self.params.adversary.server {
            ServerBehavior::DropMessages { every_nth } if every_nth > 0 => {
                self.route_ctr % every_nth == 0
            }
            _ => false,
        }
    }

    // ------------------------------------------------------------------
    // Setup: election happened in new(); here the committee runs the DKG
    // over the relay and the resulting key is distributed under signature.
    // ------------------------------------------------------------------

    pub fn setup(&mut self) -> Result<(), SessionAbort> {
        let cfg = self.params.config.clone();
        let d = cfg.timeout_dkg_us;
        let members = self.committee.members.clone();
        let verify_keys: Vec<_> = members
            .iter()
            .map(|&id| self.dir.sig_pub[id as usize])
            .collect();
        let setup_start = self.time_us;
        let in_before = self.ledger.server_in;
        let out_before = self.ledger.server_out;

        let mut parties: Vec<DkgParty> = members
            .iter()
            .map(|&id| {
                DkgParty::new(
                    id,
                    members.clone(),
                    verify_keys.clone(),
                    cfg.ell,
                    cfg.delta_d,
                    self.sessions[id as usize].keys.sig.clone(),
                    *prf(&self.dkg_rng_base, &id.to_be_bytes()).as_bytes(),
                )
            })
            .collect();

        let mut inboxes: BTreeMap<ClientId, Vec<DkgMessage>> = BTreeMap::new();
        let mut pk_batch: Vec<DkgMessage> = Vec::new();
        for _step in 0..8 {
            let t0 = self.time_us;
            let phase = self.next_phase();
            let mut outs: Vec<DkgMessage> = Vec::new();
            for p in parties.iter_mut() {
                let inbox = inboxes.remove(&p.id()).unwrap_or_default();
                outs.extend(p.step(inbox));
            }
            // on-send hook: corrupted dealers misdeal and maybe stonewall.
            for msg in outs {
                let (msg, dropped, tampered) = self.corrupt_on_send(msg);
                let len = dkg_message_len(&msg);
                let from = msg.from;
                if !dropped {
                    self.ledger.client_sent(from, len);
                }
                let at = t0 + self.params.delay.sample(&mut self.rng_delay);
                self.queue.push(
                    at,
                    phase,
                    Party::Client(from),
                    Party::Server,
                    Payload::Dkg(msg),
                    len,
                    dropped,
                    tampered,
                );
            }
            // Relay at mid-period, deliver by the deadline.
            let relay_at = t0 + d / 2;
            let arrived = self.drain_pool(relay_at, phase);
            for ev in arrived {
                let Payload::Dkg(msg) = ev.payload else { continue };
                if matches!(msg.body, DkgBody::Pk { .. }) {
                    // Key distribution fans out to the whole population; the
                    // quorum check below stands in for every client's own.
                    self.ledger.server_out +=
                        dkg_message_len(&msg) as u64 * cfg.n_total;
                    pk_batch.push(msg);
                    continue;
                }
                let recipients: Vec<ClientId> = match msg.to {
                    DkgDest::One(r) => vec![r],
                    DkgDest::All => members.iter().copied().filter(|&r| r != msg.from).collect(),
                };
                for r in recipients {
                    // on-route / on-deliver hooks
                    let dropped = self.route_drops() || self.split_qual_drops(&msg, r);
                    if self.send_down(relay_at, r, Payload::Dkg(msg.clone()), dropped, false).is_some() {
                        inboxes.entry(r).or_default().push(msg.clone());
                    }
                }
            }
            self.time_us = t0 + d;
        }

        // Record what each member concluded.
        self.dkg_outcomes = parties
            .iter_mut()
            .map(|p| {
                let summary = match p.take_outcome() {
                    Some(DkgOutcome::Finished(r)) => {
                        self.committee.shares.insert(p.id(), r.share);
                        if self.committee.registered.is_empty() {
                            self.committee.registered = r.registered.clone();
                        }
                        DkgSummary::Finished { qual: r.qual, pk: r.pk }
                    }
                    Some(DkgOutcome::Aborted(a)) => DkgSummary::Aborted(a.to_string()),
                    None => DkgSummary::Aborted("never finished".into()),
                };
                (p.id(), summary)
            })
            .collect();

        // Signed-key distribution: a client accepts the session key only on
        // 2ℓ+1 matching, correctly signed confirmations.
        let need = 2 * cfg.ell as usize + 1;
        let mut tally: BTreeMap<[u8; 32], usize> = BTreeMap::new();
        for msg in &pk_batch {
            let DkgBody::Pk { pk } = &msg.body else { continue };
            if !members.contains(&msg.from) {
                continue;
            }
            let ok = self.dir.sig_pub[msg.from as usize]
                .verify(&dkg_body_bytes(msg.from, &msg.body), &msg.sig)
                .is_ok();
            if ok {
                *tally.entry(pk.to_bytes()).or_default() += 1;
            }
        }
        let (got, pk) = tally
            .iter()
            .max_by_key(|(_, &count)| count)
            .map(|(bytes, &count)| (count, GroupElement::from_bytes(bytes).expect("tallied key")))
            .unwrap_or((0, GroupElement::identity()));
        self.time_us += d; // distribution leg
        self.setup_metrics = SetupMetrics {
            committee: members,
            dkg_finished: self.committee.shares.len(),
            bytes_server_in: self.ledger.server_in - in_before,
            bytes_server_out: self.ledger.server_out - out_before,
            duration_us: self.time_us - setup_start,
        };
        if got < need {
            return Err(SessionAbort::PkQuorum { got, need });
        }
        self.sctx.pk = pk;
        self.pk_table = Some(FixedBaseTable::new(&pk));
        Ok(())
    }

    /// on-send hook for setup: a corrupted dealer tampers the shares it
    /// deals to the script's victims (re-signing with its own key), and
    /// without `honest_reveal` it suppresses its complaint answers.
    fn corrupt_on_send(&mut self, msg: DkgMessage) -> (DkgMessage, bool, bool) {
        let ClientBehavior::BadShares {
            victims,
            honest_reveal,
        } = &self.params.adversary.clients
        else {
            return (msg, false, false);
        };
        if !self.audit.corrupted().contains(&msg.from) {
            return (msg, false, false);
        }
        match (&msg.body, msg.to) {
            (DkgBody::Deal { share, commitments }, DkgDest::One(to))
                if victims.is_empty() || victims.contains(&to) =>
            {
                let mut bad = *share;
                bad.value = bad.value + Scalar::one();
                let body = DkgBody::Deal {
                    share: bad,
                    commitments: commitments.clone(),
                };
                let sig = self.sessions[msg.from as usize]
                    .keys
                    .sig
                    .sign(&dkg_body_bytes(msg.from, &body));
                (
                    DkgMessage {
                        from: msg.from,
                        to: msg.to,
                        body,
                        sig,
                    },
                    false,
                    true,
                )
            }
            (DkgBody::Reveal { .. }, _) if !honest_reveal => (msg, true, false),
            _ => (msg, false, false),
        }
    }

    /// on-deliver hook for the split-QUAL script: once the dealings are out,
    /// the relay stops carrying qualification traffic across the middle of
    /// the committee. Each half sees only its own votes, so no party ever
    /// collects 2ℓ+1 matching qualified-set votes and every honest party
    /// aborts rather than adopt a key half the committee never agreed to.
    fn split_qual_drops(&self, msg: &DkgMessage, to: ClientId) -> bool {
        if self.params.adversary.server != ServerBehavior::SplitQual {
            return false;
        }
        if matches!(msg.body, DkgBody::Deal { .. } | DkgBody::Pk { .. }) {
            return false;
        }
        let members = &self.committee.members;
        let side = members.len() / 2;
        let pos = |id: ClientId| members.iter().position(|&m| m == id);
        match (pos(msg.from), pos(to)) {
            (Some(a), Some(b)) => (a < side) != (b < side),
            _ => false,
        }
    }

    // ------------------------------------------------------------------
    // Collection rounds
    // ------------------------------------------------------------------

    fn dropouts_for(&mut self, t: Round, cohort: &[ClientId]) -> RoundDropouts {
        let cfg = &self.params.config;
        match &self.params.dropouts {
            DropoutPlan::None => RoundDropouts::default(),
            DropoutPlan::Scripted(plan) => plan
                .get((t - 1) as usize)
                .cloned()
                .unwrap_or_default(),
            DropoutPlan::Random => {
                let mut out = RoundDropouts::default();
                let dd_budget = (cfg.delta_d * self.committee.members.len() as f64).floor() as usize;
                if dd_budget > 0 {
                    let k = self.rng_sched.gen_range(0..=dd_budget);
                    out.decryptors = sample(&mut self.rng_sched, &self.committee.members, k);
                }
                // Committee members double as cohort members; their outage
                // already spends report budget, so stay under ⌊δ·n⌋ overall.
                let overlap = cohort
                    .iter()
                    .filter(|id| out.decryptors.contains(id))
                    .count();
                let budget =
                    ((cfg.delta * cohort.len() as f64).floor() as usize).saturating_sub(overlap);
                if budget > 0 {
                    let pool: Vec<ClientId> = cohort
                        .iter()
                        .copied()
                        .filter(|id| !out.decryptors.contains(id))
                        .collect();
                    let k = self.rng_sched.gen_range(0..=budget);
                    out.reporters = sample(&mut self.rng_sched, &pool, k);
                }
                out
            }
        }
    }

    pub fn run_round(&mut self, t: Round) -> &RoundMetrics {
        let cfg = self.params.config.clone();
        let robust = self.params.robust;
        let tau0 = self.time_us;
        self.ledger = Ledger::default();

        let graph = self
            .sctx
            .round_context(t)
            .graph()
            .expect("config validated at construction");
        let cohort: Vec<ClientId> = graph.members().to_vec();
        let sched = self.dropouts_for(t, &cohort);
        let absent: BTreeSet<ClientId> = sched
            .reporters
            .iter()
            .chain(sched.decryptors.iter())
            .copied()
            .collect();
        let live_committee: Vec<ClientId> = self
            .committee
            .members
            .iter()
            .copied()
            .filter(|u| self.committee.shares.contains_key(u) && !sched.decryptors.contains(u))
            .collect();

        // ---- exchange 1: reports up --------------------------------------
        let phase_rep = self.next_phase();
        let reporters: Vec<ClientId> = cohort
            .iter()
            .copied()
            .filter(|id| !absent.contains(id))
            .collect();
        let inputs: Vec<(ClientId, Vec<u32>, [u8; 32])> = reporters
            .iter()
            .map(|&id| {
                let rng_seed =
                    *prf_round(&prf(&self.report_rng_base, &id.to_be_bytes()), t).as_bytes();
                (id, self.input_for(id, t), rng_seed)
            })
            .collect();
        let mut jobs: Vec<(&mut ClientSession, Vec<u32>, [u8; 32])> = {
            let wanted: BTreeSet<ClientId> = reporters.iter().copied().collect();
            let mut by_id: BTreeMap<ClientId, (Vec<u32>, [u8; 32])> = inputs
                .into_iter()
                .map(|(id, x, s)| (id, (x, s)))
                .collect();
            self.sessions
                .iter_mut()
                .filter(|s| wanted.contains(&s.id()))
                .map(|s| {
                    let (x, seed) = by_id.remove(&s.id()).expect("one job per reporter");
                    (s, x, seed)
                })
                .collect()
        };
        let sctx = &self.sctx;
        let dir = &self.dir;
        let pk_table = self.pk_table.as_ref().expect("setup completed");
        let reports: Vec<MaskedVector> = parallel::map_collect_mut(&mut jobs, |(s, x, seed)| {
            let mut rng = ChaCha20Rng::from_seed(*seed);
            client_report(s, sctx, dir, pk_table, t, x.clone(), &mut rng)
                .expect("cohort member with validated dimensions")
                .expect("reporter is in the cohort")
        });
        drop(jobs);
        for mv in reports {
            let from = mv.client;
            self.send_up(tau0, phase_rep, from, Payload::Report(mv));
        }
        let deadline1 = tau0 + cfg.timeout_report_us;
        let arrived = self.drain_pool(deadline1, phase_rep);
        let ms_report = arrived
            .iter()
            .map(|e| e.at_us - tau0)
            .max()
            .unwrap_or(0) as f64
            / 1000.0;
        let mut accepted = Vec::new();
        let mut reported: BTreeSet<ClientId> = BTreeSet::new();
        for ev in arrived {
            if let Payload::Report(mv) = ev.payload {
                reported.insert(mv.client);
                accepted.push(mv);
            }
        }
        let got_reports = !accepted.is_empty();
        let (partial, bundle) = server_collect(&self.sctx, &graph, t, accepted);
        let online_labels: BTreeSet<ClientId> = partial.online.iter().copied().collect();

        // ---- exchange 2: requests down, signed requests up ---------------
        let tau1 = deadline1;
        let phase_vote = self.next_phase();
        let base_req = bundle.req.clone();
        for (pos, &u) in live_committee.iter().enumerate() {
            let mut req = base_req.clone();
            let mut tampered = false;
            if self.params.adversary.server == ServerBehavior::EquivocateLabels
                && pos >= live_committee.len() / 2
            {
                if let Some(slot) = req.labels.iter_mut().find(|(_, l)| *l == Label::Online) {
                    slot.1 = Label::Offline;
                    tampered = true;
                }
            }
            let dropped = self.route_drops();
            if let Some(arrival) =
                self.send_down(tau1, u, Payload::Request(req.clone()), dropped, tampered)
            {
                if let Ok(sv) = sign_request(&self.sessions[u as usize], t, req) {
                    self.send_up(arrival, phase_vote, u, Payload::Vote(sv));
                }
            }
        }
        let deadline2 = tau1 + cfg.timeout_check_us;
        let arrived = self.drain_pool(deadline2, phase_vote);
        let ms_check = arrived
            .iter()
            .map(|e| e.at_us - tau1)
            .max()
            .unwrap_or(0) as f64
            / 1000.0;
        let mut votes: Vec<SignedRequest> = Vec::new();
        for ev in arrived {
            if let Payload::Vote(sv) = ev.payload {
                votes.push(sv);
            }
        }
        let got_votes = !votes.is_empty();

        // ---- exchange 3: evidence down, responses up ---------------------
        let tau2 = deadline2;
        let phase_resp = self.next_phase();
        // The replayed attachments carry last round's tag, so honest parties
        // refuse to act on them item by item; keep the honest list separate
        // for the audit and for next round's planting material.
        let honest_attachments = bundle.offline_pairs.clone();
        let mut bundle_sent = bundle;
        if self.params.adversary.server == ServerBehavior::ReplayCrossRound {
            let mut planted = self.prev_attachments.clone();
            planted.extend(std::mem::take(&mut bundle_sent.offline_pairs));
            bundle_sent.offline_pairs = planted;
        }
        let mut check_aborts: Vec<(ClientId, CheckAbort)> = Vec::new();
        let mut arrivals: Vec<(ClientId, u64)> = Vec::new();
        for &u in &live_committee {
            let packet = ReconPacket {
                votes: votes.clone(),
                bundle: bundle_sent.clone(),
            };
            let dropped = self.route_drops();
            if let Some(arrival) =
                self.send_down(tau2, u, Payload::Recon(Box::new(packet)), dropped, false)
            {
                arrivals.push((u, arrival));
            }
        }
        // Decryptors act on arrival; the heavy share-opening and partial
        // decryption fans out, one worker per decryptor.
        let checked: Vec<(ClientId, u64, Result<DecryptionRequest, CheckAbort>)> = arrivals
            .iter()
            .map(|&(u, arrival)| {
                (
                    u,
                    arrival,
                    cross_check(&self.sctx, &self.dir, &graph, t, &votes),
                )
            })
            .collect();
        let mut respond_jobs: Vec<(&mut ClientSession, DecryptionRequest, u64, [u8; 32])> = {
            let mut per_id: BTreeMap<ClientId, (DecryptionRequest, u64)> = BTreeMap::new();
            for (u, arrival, res) in checked {
                match res {
                    Ok(req) => {
                        per_id.insert(u, (req, arrival));
                    }
                    Err(abort) => check_aborts.push((u, abort)),
                }
            }
            let wanted: BTreeSet<ClientId> = per_id.keys().copied().collect();
            self.sessions
                .iter_mut()
                .filter(|s| wanted.contains(&s.id()))
                .map(|s| {
                    let id = s.id();
                    let (req, arrival) = per_id.remove(&id).expect("one job per responder");
                    let rng_seed =
                        *prf_round(&prf(&self.respond_rng_base, &id.to_be_bytes()), t).as_bytes();
                    (s, req, arrival, rng_seed)
                })
                .collect()
        };
        let sctx = &self.sctx;
        let dir = &self.dir;
        let committee = &self.committee;
        let bundle_ref = &bundle_sent;
        let graph_ref = &graph;
        let responses: Vec<(u64, DecryptorResponse)> =
            parallel::map_collect_mut(&mut respond_jobs, |(s, req, arrival, seed)| {
                let mut rng = ChaCha20Rng::from_seed(*seed);
                let share = committee.shares.get(&s.id()).expect("live member has a share");
                let resp = aggsum_core::protocol::respond(
                    s, sctx, dir, graph_ref, share, req, bundle_ref, robust, &mut rng,
                )
                .expect("bundle built by this simulator");
                (*arrival, resp)
            });
        drop(respond_jobs);
        let mut responders: BTreeSet<ClientId> = BTreeSet::new();
        for (arrival, mut resp) in responses {
            let mut tampered = false;
            if self.params.adversary.clients == ClientBehavior::BadPartials
                && self.audit.corrupted().contains(&resp.decryptor)
            {
                for p in resp.partials.iter_mut() {
                    p.partial.value = p.partial.value + GroupElement::mul_base(&Scalar::one());
                }
                tampered = !resp.partials.is_empty();
            }
            responders.insert(resp.decryptor);
            let from = resp.decryptor;
            let len = payload_len(&Payload::Response(Box::new(resp.clone())));
            self.ledger.client_sent(from, len);
            let at = arrival + self.params.delay.sample(&mut self.rng_delay);
            self.queue.push(
                at,
                phase_resp,
                Party::Client(from),
                Party::Server,
                Payload::Response(Box::new(resp)),
                len,
                false,
                tampered,
            );
        }
        let deadline3 = tau2 + cfg.timeout_recon_us;
        let arrived = self.drain_pool(deadline3, phase_resp);
        let ms_recon = arrived
            .iter()
            .map(|e| e.at_us - tau2)
            .max()
            .unwrap_or(0) as f64
            / 1000.0;
        let mut responses: Vec<DecryptorResponse> = Vec::new();
        for ev in arrived {
            if let Payload::Response(r) = ev.payload {
                responses.push(*r);
            }
        }
        let got_responses = !responses.is_empty();

        let included: Vec<ClientId> = partial.online.clone();
        let finalized = server_finalize(
            &self.sctx,
            &self.dir,
            &graph,
            partial,
            &bundle_sent,
            responses,
            &self.committee.registered,
            robust,
        );

        // ---- bookkeeping -------------------------------------------------
        let cohort_size = cohort.len().max(1) as f64;
        let (tau, outcome, oracle_match, included_count, excluded) = match finalized {
            Ok(out) => {
                let oracle = self.oracle_sum(&included, t);
                (
                    included.len() as f64 / cohort_size,
                    Outcome::SumOk,
                    Some(out.sum == oracle),
                    included.len(),
                    out.excluded,
                )
            }
            Err(abort) => {
                let reason = if let Some((_, check)) = check_aborts.first() {
                    check_reason(check)
                } else {
                    finalize_reason(&abort)
                };
                (0.0, Outcome::Abort(reason), None, 0, Vec::new())
            }
        };

        let neighbors: BTreeMap<ClientId, Vec<ClientId>> = reported
            .iter()
            .map(|&i| (i, graph.neighbors(i).unwrap_or_default()))
            .collect();
        let served_pairs: Vec<(ClientId, ClientId)> = honest_attachments
            .iter()
            .map(|a| (a.owner, a.reporter))
            .collect();
        self.audit.record_round(RoundVisibility {
            t,
            committee: self.committee.members.clone(),
            reported,
            neighbors,
            online_labels,
            served_pairs,
            responders,
            bundle_served: true,
        });
        self.prev_attachments = honest_attachments;

        let metrics = RoundMetrics {
            t,
            tau,
            outcome,
            rt_count: got_reports as u32 + got_votes as u32 + got_responses as u32,
            bytes_server_in: self.ledger.server_in,
            bytes_server_out: self.ledger.server_out,
            bytes_client_max: self
                .ledger
                .client_bytes
                .values()
                .copied()
                .max()
                .unwrap_or(0),
            ms_report,
            ms_check,
            ms_recon,
            oracle_match,
            included: included_count,
            excluded_decryptors: excluded,
        };
        self.time_us = deadline3;
        self.round_metrics.push(metrics);
        self.round_metrics.last().expect("just pushed")
    }

    /// Messages a non-decryptor cohort member sent in the last round.
    pub fn last_round_nondecryptor_msgs(&self) -> u32 {
        let cohort_committee: BTreeSet<ClientId> =
            self.committee.members.iter().copied().collect();
        self.ledger
            .client_msgs
            .iter()
            .filter(|(id, _)| !cohort_committee.contains(id))
            .map(|(_, &n)| n)
            .max()
            .unwrap_or(0)
    }

    // ------------------------------------------------------------------
    // Periodic hand-over to a freshly elected committee.
    // ------------------------------------------------------------------

    pub fn run_transfer(&mut self, after: Round) -> Result<(), SessionAbort> {
        let cfg = self.params.config.clone();
        let d = cfg.timeout_dkg_us;
        let epoch = self.committee.epoch + 1;
        let new_roster = choose_set(
            &self.beacon_committee,
            epoch,
            cfg.decryptors,
            cfg.n_total,
        )
        .expect("validated population");
        let old_roster = self.committee.members.clone();
        let old_registered = self.committee.registered.clone();
        let old_keys: Vec<_> = old_roster
            .iter()
            .map(|&id| self.dir.sig_pub[id as usize])
            .collect();
        let new_keys: Vec<_> = new_roster
            .iter()
            .map(|&id| self.dir.sig_pub[id as usize])
            .collect();
        let in_before = self.ledger.server_in;
        let out_before = self.ledger.server_out;

        // Leg 1: every current holder re-shares to the new roster.
        let t0 = self.time_us;
        let phase_deal = self.next_phase();
        let holders: Vec<ClientId> = self.committee.shares.keys().copied().collect();
        for u in holders {
            let share = self.committee.shares[&u];
            let mut rng = ChaCha20Rng::from_seed(
                *prf_round(&prf(&self.dkg_rng_base, &u.to_be_bytes()), epoch).as_bytes(),
            );
            let msgs = deal_transfer(
                u,
                &share,
                cfg.ell,
                &new_roster,
                &self.sessions[u as usize].keys.sig,
                &mut rng,
            );
            for msg in msgs {
                let len = transfer_message_len(&msg);
                self.ledger.client_sent(u, len);
                let at = t0 + self.params.delay.sample(&mut self.rng_delay);
                self.queue.push(
                    at,
                    phase_deal,
                    Party::Client(u),
                    Party::Server,
                    Payload::Transfer(msg),
                    len,
                    false,
                    false,
                );
            }
        }
        let mut parties: Vec<TransferParty> = new_roster
            .iter()
            .map(|&id| {
                TransferParty::new(
                    id,
                    new_roster.clone(),
                    old_roster.clone(),
                    old_registered.clone(),
                    old_keys.clone(),
                    new_keys.clone(),
                    cfg.ell,
                    self.sessions[id as usize].keys.sig.clone(),
                )
            })
            .collect();

        let mut inboxes: BTreeMap<ClientId, Vec<TransferMessage>> = BTreeMap::new();
        for leg in 0..2u8 {
            let start = self.time_us;
            let phase = if leg == 0 { phase_deal } else { self.phase_ctr };
            let relay_at = start + d / 2;
            let arrived = self.drain_pool(relay_at, phase);
            for ev in arrived {
                let Payload::Transfer(msg) = ev.payload else { continue };
                let recipients: Vec<ClientId> = match msg.to {
                    DkgDest::One(r) => vec![r],
                    DkgDest::All => new_roster
                        .iter()
                        .copied()
                        .filter(|&r| r != msg.from)
                        .collect(),
                };
                for r in recipients {
                    let dropped = self.route_drops();
                    if self
                        .send_down(relay_at, r, Payload::Transfer(msg.clone()), dropped, false)
                        .is_some()
                    {
                        inboxes.entry(r).or_default().push(msg.clone());
                    }
                }
            }
            // Step all new holders at the deadline; their outbox (votes) goes
            // back up for the second leg.
            let deadline = start + d;
            let phase_up = self.next_phase();
            for p in parties.iter_mut() {
                let inbox = inboxes.remove(&p.id()).unwrap_or_default();
                for msg in p.step(inbox) {
                    let len = transfer_message_len(&msg);
                    let from = msg.from;
                    self.ledger.client_sent(from, len);
                    let at = deadline + self.params.delay.sample(&mut self.rng_delay);
                    self.queue.push(
                        at,
                        phase_up,
                        Party::Client(from),
                        Party::Server,
                        Payload::Transfer(msg),
                        len,
                        false,
                        false,
                    );
                }
            }
            self.time_us = deadline;
        }
        self.time_us += d; // final settling period

        let mut shares = BTreeMap::new();
        let mut registered = Vec::new();
        let mut pk = self.sctx.pk;
        for p in parties.iter_mut() {
            if let Some(TransferOutcome::Finished(r)) = p.take_outcome() {
                shares.insert(p.id(), r.share);
                registered = r.registered;
                pk = r.pk;
            }
        }
        let holders = shares.len();
        let need = cfg.ell as usize + 1;
        self.transfer_metrics.push(TransferMetrics {
            after_round: after,
            new_committee: new_roster.clone(),
            holders,
            bytes_server_in: self.ledger.server_in - in_before,
            bytes_server_out: self.ledger.server_out - out_before,
        });
        if holders < need {
            return Err(SessionAbort::Transfer {
                after,
                holders,
                need,
            });
        }
        debug_assert_eq!(pk, self.sctx.pk, "hand-over must preserve the session key");
        self.committee = CommitteeState {
            epoch,
            members: new_roster.clone(),
            shares,
            registered,
        };
        self.sctx.decryptors = new_roster;
        // Position-based corruption follows the committee slots.
        let mut corrupted = self.params.adversary.corrupted.clone();
        for &slot in &self.params.adversary.corrupt_committee_slots {
            if let Some(&id) = self.committee.members.get(slot) {
                corrupted.insert(id);
            }
        }
        for existing in self.audit.corrupted() {
            corrupted.insert(*existing);
        }
        self.audit.set_corrupted(corrupted);
        Ok(())
    }

    pub fn finish(self, outcome: SessionOutcome) -> SessionReport {
        SessionReport {
            outcome,
            setup: self.setup_metrics,
            rounds: self.round_metrics,
            transfers: self.transfer_metrics,
            audit: self.audit.finish(),
            trace: self.trace_buf,
        }
    }
}

fn check_reason(abort: &CheckAbort) -> AbortReason {
    match abort {
        CheckAbort::RoundMismatch { .. } => AbortReason::RoundMismatch,
        CheckAbort::NoQuorum { .. } => AbortReason::Quorum,
        CheckAbort::BadLabeling => AbortReason::Labeling,
        CheckAbort::TooFewOnline { .. } => AbortReason::OnlineFloor,
        CheckAbort::Disconnected => AbortReason::Disconnected,
        CheckAbort::TooFewOnlineNeighbors { .. } => AbortReason::Neighbors,
    }
}

fn finalize_reason(abort: &FinalizeAbort) -> AbortReason {
    match abort {
        FinalizeAbort::InsufficientDecryptors { .. } => AbortReason::Decryptors,
        FinalizeAbort::MaskUnrecoverable(_) => AbortReason::Mask,
        FinalizeAbort::PairUnrecoverable(_, _) => AbortReason::Pair,
    }
}

fn payload_len(p: &Payload) -> usize {
    match p {
        Payload::Report(mv) => wire::encode_masked_vector(mv).len(),
        Payload::Request(req) => wire::request_bytes(req).len(),
        Payload::Vote(sv) => wire::encode_signed_request(sv).len(),
        Payload::Recon(packet) => {
            4 + packet
                .votes
                .iter()
                .map(|v| wire::encode_signed_request(v).len())
                .sum::<usize>()
                + wire::encode_request_bundle(&packet.bundle).len()
        }
        Payload::Response(r) => wire::encode_response(r).len(),
        Payload::Dkg(m) => dkg_message_len(m),
        Payload::Transfer(m) => transfer_message_len(m),
    }
}

/// Canonical bytes for the trace; DKG and transfer payloads are logged as
/// their signed body plus signature.
fn encode_payload(p: &Payload) -> (u8, Vec<u8>) {
    match p {
        Payload::Report(mv) => (trace::KIND_REPORT, wire::encode_masked_vector(mv)),
        Payload::Request(req) => (trace::KIND_REQUEST, wire::request_bytes(req)),
        Payload::Vote(sv) => (trace::KIND_VOTE, wire::encode_signed_request(sv)),
        Payload::Recon(packet) => {
            let mut out = (packet.votes.len() as u32).to_be_bytes().to_vec();
            for v in &packet.votes {
                out.extend_from_slice(&wire::encode_signed_request(v));
            }
            out.extend_from_slice(&wire::encode_request_bundle(&packet.bundle));
            (trace::KIND_RECON, out)
        }
        Payload::Response(r) => (trace::KIND_RESPONSE, wire::encode_response(r)),
        Payload::Dkg(m) => {
            let mut out = dkg_body_bytes(m.from, &m.body);
            out.extend_from_slice(&m.sig.to_bytes());
            (trace::KIND_DKG, out)
        }
        Payload::Transfer(m) => {
            let mut out = aggsum_core::dkg::transfer_body_bytes(m.from, &m.body);
            out.extend_from_slice(&m.sig.to_bytes());
            (trace::KIND_TRANSFER, out)
        }
    }
}

/// Uniform sample of `k` distinct elements, stable under the seeded stream.
fn sample(rng: &mut ChaCha20Rng, pool: &[ClientId], k: usize) -> BTreeSet<ClientId> {
    let mut indices: Vec<usize> = (0..pool.len()).collect();
    let mut out = BTreeSet::new();
    for _ in 0..k.min(pool.len()) {
        let pick = rng.gen_range(0..indices.len());
        out.insert(pool[indices.swap_remove(pick)]);
    }
    out
}
