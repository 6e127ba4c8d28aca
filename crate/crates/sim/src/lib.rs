//! Deterministic discrete-event simulator for the aggregation protocol.
//!
//! One process plays every role: the server, the full client population, and
//! the decryption committee. Messages move through a star topology with
//! seeded random delays; the server batches each step's traffic and acts only
//! at that step's deadline, so a session is a deterministic function of its
//! parameters and master seed. Fault and adversary injection run at fixed
//! hook points, and an offline audit replays what a transcript-holding
//! adversary could see.

pub mod adversary;
pub mod audit;
pub mod delay;
pub mod event;
pub mod metrics;
pub mod trace;
pub mod world;

pub use adversary::{AdversaryScript, ClientBehavior, ServerBehavior};
pub use audit::{AuditReport, AuditViolation};
pub use delay::DelayModel;
pub use metrics::{AbortReason, Outcome, RoundMetrics, SetupMetrics, TransferMetrics, CSV_HEADER};
pub use world::{
    run_session, DkgSummary, DropoutPlan, RoundDropouts, SessionAbort, SessionOutcome,
    SessionReport, SimError, SimParams, World,
};
