//! Distributed key generation and proactive share transfer.

pub mod machine;
pub mod transfer;
pub mod vss;

pub use machine::{
    dkg_body_bytes, dkg_message_len, DkgAbort, DkgBody, DkgDest, DkgMessage, DkgOutcome,
    DkgParty, DkgPhase, DkgResult,
};
pub use transfer::{
    deal_transfer, transfer_body_bytes, transfer_message_len, transfer_shares, TransferAbort,
    TransferBody, TransferMessage, TransferOutcome, TransferParty, TransferResult,
};
