//! Per-round measurements and the session CSV.
//!
//! The CSV schema is fixed: `t, tau, outcome, rt_count, bytes_server_in,
//! bytes_server_out, bytes_client_max, ms_report, ms_check, ms_recon` — one
//! row per collection round, nothing else. Extra diagnostics (oracle match,
//! excluded decryptors) live on [`RoundMetrics`] but never leak into the CSV.
//!
//! The `ms_*` columns measure data-ready latency inside each waiting period:
//! the virtual time between the step opening and the arrival of the last
//! message the server accepted for it. The waiting periods themselves are
//! constants from the config, so reporting them would say nothing.

use std::fmt;

use aggsum_core::{ClientId, Round};

/// Why a round ended without a sum. Mirrors the protocol's abort taxonomy,
/// flattened to stable CSV vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbortReason {
    /// Fewer than 2ℓ+1 identical signed requests.
    Quorum,
    /// Labels did not cover the cohort exactly.
    Labeling,
    /// Online set below n_t − ⌊δ·n_t⌋.
    OnlineFloor,
    /// Online subgraph disconnected.
    Disconnected,
    /// Some online client kept fewer than k_min online neighbors.
    Neighbors,
    /// Request carried the wrong round number.
    RoundMismatch,
    /// Fewer than ℓ+1 usable decryptor responses.
    Decryptors,
    /// An online client's mask shares did not reconstruct.
    Mask,
    /// An offline pairwise mask could not be recovered.
    Pair,
}

impl AbortReason {
    fn as_str(self) -> &'static str {
        match self {
            AbortReason::Quorum => "abort-quorum",
            AbortReason::Labeling => "abort-labeling",
            AbortReason::OnlineFloor => "abort-online-floor",
            AbortReason::Disconnected => "abort-disconnected",
            AbortReason::Neighbors => "abort-neighbors",
            AbortReason::RoundMismatch => "abort-round-mismatch",
            AbortReason::Decryptors => "abort-decryptors",
            AbortReason::Mask => "abort-mask",
            AbortReason::Pair => "abort-pair",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    SumOk,
    Abort(AbortReason),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::SumOk => f.write_str("ok"),
            Outcome::Abort(r) => f.write_str(r.as_str()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RoundMetrics {
    pub t: Round,
    /// |included| / |cohort|; 0 on abort.
    pub tau: f64,
    pub outcome: Outcome,
    /// Completed client↔server exchanges (3 in an honest round).
    pub rt_count: u32,
    pub bytes_server_in: u64,
    pub bytes_server_out: u64,
    /// max over clients of bytes sent + received this round.
    pub bytes_client_max: u64,
    pub ms_report: f64,
    pub ms_check: f64,
    pub ms_recon: f64,
    // Diagnostics outside the CSV schema.
    /// Sum equals the plaintext oracle over the included set (None on abort).
    pub oracle_match: Option<bool>,
    pub included: usize,
    pub excluded_decryptors: Vec<ClientId>,
}

pub const CSV_HEADER: &str = "t,tau,outcome,rt_count,bytes_server_in,bytes_server_out,bytes_client_max,ms_report,ms_check,ms_recon";

impl RoundMetrics {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.4},{},{},{},{},{},{:.3},{:.3},{:.3}",
            self.t,
            self.tau,
            self.outcome,
            self.rt_count,
            self.bytes_server_in,
            self.bytes_server_out,
            self.bytes_client_max,
            self.ms_report,
            self.ms_check,
            self.ms_recon,
        )
    }
}

/// Setup-phase (election + DKG + key distribution) totals.
#[derive(Clone, Debug, Default)]
pub struct SetupMetrics {
    pub committee: Vec<ClientId>,
    pub dkg_finished: usize,
    pub bytes_server_in: u64,
    pub bytes_server_out: u64,
    pub duration_us: u64,
}

#[derive(Clone, Debug)]
pub struct TransferMetrics {
    pub after_round: Round,
    pub new_committee: Vec<ClientId>,
    /// New holders that finished with a share.
    pub holders: usize,
    pub bytes_server_in: u64,
    pub bytes_server_out: u64,
}
