//! Quantum fingerprints and the controlled-SWAP test.
//!
//! A fingerprint of `y ∈ {0,1}^m` is the phase state
//! `|ψ_y⟩ = (1/√m) Σ_j (−1)^{y_j} |j⟩`. We store the phase pattern `y` and
//! derive everything from Hamming distance: `⟨ψ_a|ψ_b⟩ = (m − 2d)/m`, and the
//! SWAP test measures 0 with probability `(1 + ⟨ψ_a|ψ_b⟩²)/2`.
//!
//! Measured copies are discarded; callers that need another comparison fetch
//! fresh copies.

pub mod statevector;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::code::hamming_distance;
use crate::error::{Error, Result};

pub use statevector::cswap_statevector_prob;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    phases: Vec<bool>,
}

impl Fingerprint {
    /// Fingerprint of a codeword or of raw memory contents.
    pub fn new(word: &[bool]) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::Empty);
        }
        Ok(Fingerprint {
            phases: word.to_vec(),
        })
    }

    pub fn phases(&self) -> &[bool] {
        &self.phases
    }

    pub fn m(&self) -> usize {
        self.phases.len()
    }

    /// Number of qubits needed to hold the state: `⌈log₂ m⌉`.
    pub fn qubits(&self) -> u32 {
        qubits_for(self.m())
    }

    /// Amplitude on basis state `|j⟩`.
    pub fn amplitude(&self, j: usize) -> f64 {
        let a = 1.0 / (self.m() as f64).sqrt();
        if self.phases[j] {
            -a
        } else {
            a
        }
    }

    pub fn distance(&self, other: &Fingerprint) -> Result<usize> {
        hamming_distance(&self.phases, &other.phases)
    }
}

pub(crate) fn qubits_for(m: usize) -> u32 {
    if m <= 1 {
        0
    } else {
        usize::BITS - (m - 1).leading_zeros()
    }
}

pub fn make_fingerprint(word: &[bool]) -> Result<Fingerprint> {
    Fingerprint::new(word)
}

/// `⟨ψ_a|ψ_b⟩`, real because both states are.
pub fn inner_product(a: &Fingerprint, b: &Fingerprint) -> Result<f64> {
    let d = a.distance(b)?;
    let m = a.m() as i64;
    Ok((m - 2 * d as i64) as f64 / m as f64)
}

/// Probability that the controlled-SWAP test on `a` and `b` measures 0.
pub fn swap_accept_prob(a: &Fingerprint, b: &Fingerprint) -> Result<f64> {
    let ip = inner_product(a, b)?;
    Ok((1.0 + ip * ip) / 2.0)
}

/// Measurement of the control qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SwapOutcome {
    /// Control measured 0: the states look equal.
    Accept,
    /// Control measured 1: the states certainly differ.
    Reject,
}

impl SwapOutcome {
    pub fn bit(self) -> u8 {
        match self {
            SwapOutcome::Accept => 0,
            SwapOutcome::Reject => 1,
        }
    }
}

pub fn sample_swap_test<R: Rng + ?Sized>(
    a: &Fingerprint,
    b: &Fingerprint,
    rng: &mut R,
) -> Result<SwapOutcome> {
    let p = swap_accept_prob(a, b)?;
    // `random::<f64>()` lies in [0, 1), so p = 1 always accepts.
    Ok(if rng.random::<f64>() < p {
        SwapOutcome::Accept
    } else {
        SwapOutcome::Reject
    })
}
