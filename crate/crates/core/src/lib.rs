//! Core library for a multi-round, single-server secure-aggregation protocol.
//!
//! A fixed population of `N` clients holds long-term keys; each round `t` a
//! pseudorandomly chosen cohort `S_t` masks its input vectors so the server
//! learns only the cohort sum. A small committee of decryptors, holding a
//! Shamir-shared ElGamal key produced by a one-time DKG, lets the server
//! recover the masks of clients that drop out mid-round. This crate contains
//! the deterministic building blocks: the crypto toolkit, the per-round graph
//! derivation, the DKG and share-transfer state machines, the client/server/
//! decryptor round logic, and the parameter-selection math. Networking,
//! scheduling, and adversaries live in the companion simulator crate.

pub mod crypto;
pub mod dkg;
pub mod graph;
pub mod parallel;
pub mod params;
pub mod protocol;

/// Stable client identifier in `0..N`.
pub type ClientId = u64;

/// Round counter. Round 0 is setup; summation rounds start at 1.
pub type Round = u64;
