//! Simulation and analysis of a fingerprint-based quantum online memory checker.
//!
//! A user stores an `n`-bit message through a [`checker::Checker`], which writes a
//! locally decodable encoding of it to an untrusted [`checker::PublicMemory`] and
//! keeps `k` quantum fingerprints of the codeword privately. Every retrieve first
//! SWAP-tests fresh summaries of the public memory against the private copies and
//! reports [`checker::Verdict::Buggy`] on any rejection; otherwise it locally
//! decodes the requested bit with `q` reads.
//!
//! Fingerprints here are phase states `(1/√m) Σ (−1)^{y_j} |j⟩`, represented by
//! their classical phase pattern. Every probability the protocol needs is a
//! function of Hamming distance, so Monte Carlo sessions are cheap; the dense
//! statevector in [`fingerprint::statevector`] checks that model against the
//! actual controlled-SWAP circuit.
//!
//! Module map:
//! - [`code`]: the locally decodable code abstraction and the Hadamard code.
//! - [`fingerprint`]: phase-state fingerprints, SWAP-test statistics, statevector oracle.
//! - [`checker`]: store/retrieve protocols and space/query accounting.
//! - [`adversary`]: scripted corruption of the public memory.
//! - [`analysis`]: closed-form detection bounds and their brute-force verification.
//! - [`harness`]: experiment configuration, Monte Carlo runner, result output.

pub mod adversary;
pub mod analysis;
pub mod checker;
pub mod code;
pub mod error;
pub mod fingerprint;
pub mod harness;

pub use error::{Error, Result};
