//! Per-round collection: clients report masked vectors, the server labels
//! who made it, decryptors cross-check the labeling and hand back exactly
//! what the server needs to strip the surviving masks.
//!
//! The happy path is three exchanges per round — report, request signing,
//! reconstruction — and a client that is not a decryptor speaks exactly once.
//! Every operation here is a pure function over explicit state; transport,
//! timing and loss live in the simulator crate.

pub mod decryptor;
pub mod dleq;
pub mod report;
pub mod server;
pub mod types;
pub mod wire;

pub use decryptor::{cross_check, respond, sign_request, CheckAbort};
pub use report::client_report;
pub use server::{server_collect, server_finalize, FinalizeAbort, FinalizeOutput};
pub use types::*;
