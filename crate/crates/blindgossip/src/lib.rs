//! Privacy-preserving randomized gossip consensus.
//!
//! Agents hold rational states `n / 2^e` whose numerators are always additively
//! masked. Each pairwise update fuses two masked numerators; the masks are
//! handed from one partner to the next with unidirectional proxy
//! re-encryption, and the final threshold test runs inside a garbled circuit
//! so that no agent ever sees a plaintext consensus value.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`]: modular and rational arithmetic plus the plaintext gossip oracle.
//! * [`blinding`]: uniform and statistical additive masks.
//! * [`pre`]: the pairing-based proxy re-encryption scheme and scalar envelopes.
//! * [`gc`]: decision circuits, garbling, precomputed OT and bit accounting.
//! * [`agent`]: the per-agent update and decision state machine.
//! * [`simnet`]: topologies, gossip scheduling, spectral analysis and runs.
//! * [`harness`]: experiment configuration, audits and reports.

pub mod agent;
pub mod arith;
pub mod blinding;
pub mod codec;
pub mod error;
pub mod gc;
pub mod harness;
pub mod par;
pub mod pre;
pub mod rng;
pub mod simnet;

pub use error::{Error, Result};
