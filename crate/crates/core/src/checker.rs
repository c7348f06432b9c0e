//! The online memory checker.
//!
//! [`Checker`] holds `k` private fingerprints of the codeword it last wrote.
//! Both protocols begin by fetching `k` summary states of the public memory and
//! SWAP-testing them pairwise against the private copies; any rejection yields
//! [`Verdict::Buggy`] in that same call and leaves the private state untouched.
//!
//! Retrieve then decodes the requested bit with one local-decoder run and
//! refreshes the private copies with `k` further summaries, so a retrieve
//! fetches `2k` summaries in total. Store rewrites memory with the new codeword
//! and regenerates the private copies locally.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::code::{Codeword, LocallyDecodableCode, Message};
use crate::error::{Error, Result};
use crate::fingerprint::{qubits_for, sample_swap_test, Fingerprint, SwapOutcome};

/// The adversary-writable memory, with counters for everything served to the checker.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PublicMemory {
    bits: Vec<bool>,
    read_log: u64,
    summary_log: u64,
}

impl PublicMemory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_initialized(&self) -> bool {
        !self.bits.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contents(&self) -> &[bool] {
        &self.bits
    }

    /// Bit positions served so far.
    pub fn read_log(&self) -> u64 {
        self.read_log
    }

    /// Summary states served so far.
    pub fn summary_log(&self) -> u64 {
        self.summary_log
    }

    pub fn read(&mut self, pos: usize) -> Result<bool> {
        let bit = *self.bits.get(pos).ok_or(Error::IndexOutOfRange {
            index: pos,
            len: self.bits.len(),
        })?;
        self.read_log += 1;
        Ok(bit)
    }

    /// Prepares one summary state `|y⟩` of the current contents.
    pub fn summary(&mut self) -> Result<Fingerprint> {
        let f = Fingerprint::new(&self.bits)?;
        self.summary_log += 1;
        Ok(f)
    }

    /// Writes a codeword. The length is fixed by the first write.
    pub fn write(&mut self, word: &Codeword) -> Result<()> {
        self.overwrite(word.bits())
    }

    /// Replaces the contents wholesale, as an adversary may.
    pub fn overwrite(&mut self, bits: &[bool]) -> Result<()> {
        if self.is_initialized() && bits.len() != self.bits.len() {
            return Err(Error::LengthMismatch {
                expected: self.bits.len(),
                actual: bits.len(),
            });
        }
        if bits.is_empty() {
            return Err(Error::Empty);
        }
        self.bits = bits.to_vec();
        Ok(())
    }

    pub fn flip(&mut self, pos: usize) -> Result<()> {
        let len = self.bits.len();
        let bit = self
            .bits
            .get_mut(pos)
            .ok_or(Error::IndexOutOfRange { index: pos, len })?;
        *bit = !*bit;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Answer(bool),
    Buggy,
}

impl Verdict {
    pub fn is_buggy(self) -> bool {
        matches!(self, Verdict::Buggy)
    }
}

/// What one retrieve fetched from public memory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrieveLog {
    pub summaries: u64,
    pub bit_reads: u64,
    pub outcomes: Vec<SwapOutcome>,
    pub verdict: Verdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityReport {
    /// Private memory: `k · ⌈log₂ m⌉` qubits.
    pub s_qubits: u64,
    /// Qubits and bits served for one retrieve.
    pub t_qubits_per_retrieve: u64,
}

pub struct Checker<C> {
    code: C,
    k: usize,
    epsilon: f64,
    stored: Vec<Fingerprint>,
    last_outcomes: Vec<SwapOutcome>,
    last_retrieve: Option<RetrieveLog>,
}

impl<C: LocallyDecodableCode> Checker<C> {
    pub fn new(code: C, k: usize, epsilon: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::config(
                "k",
                "at least one fingerprint copy is required",
            ));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::config("epsilon", "must lie in (0, 1/2)"));
        }
        Ok(Checker {
            code,
            k,
            epsilon,
            stored: Vec::new(),
            last_outcomes: Vec::new(),
            last_retrieve: None,
        })
    }

    /// Builds a checker with `k` chosen by [`required_k`] for the code's distance.
    pub fn with_target_error(code: C, epsilon: f64) -> Result<Self> {
        let k = required_k(epsilon, code.params().delta)?;
        Self::new(code, k, epsilon)
    }

    pub fn code(&self) -> &C {
        &self.code
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn is_initialized(&self) -> bool {
        !self.stored.is_empty()
    }

    pub fn stored_fingerprints(&self) -> &[Fingerprint] {
        &self.stored
    }

    /// SWAP-test outcomes from the most recent verification phase.
    pub fn last_outcomes(&self) -> &[SwapOutcome] {
        &self.last_outcomes
    }

    pub fn last_retrieve(&self) -> Option<&RetrieveLog> {
        self.last_retrieve.as_ref()
    }

    /// Tests every stored copy against a fresh summary. All `k` tests are sampled
    /// even after a rejection.
    fn verify<R: Rng + ?Sized>(&mut self, memory: &mut PublicMemory, rng: &mut R) -> Result<bool> {
        let mut outcomes = Vec::with_capacity(self.k);
        for stored in &self.stored {
            let summary = memory.summary()?;
            outcomes.push(sample_swap_test(stored, &summary, rng)?);
        }
        let ok = outcomes.iter().all(|&o| o == SwapOutcome::Accept);
        self.last_outcomes = outcomes;
        Ok(ok)
    }

    pub fn store<R: Rng + ?Sized>(
        &mut self,
        memory: &mut PublicMemory,
        msg: &Message,
        rng: &mut R,
    ) -> Result<Verdict> {
        let word = self.code.encode(msg)?;
        if self.is_initialized() {
            if !self.verify(memory, rng)? {
                return Ok(Verdict::Buggy);
            }
        } else {
            self.last_outcomes.clear();
        }
        memory.write(&word)?;
        let fresh = Fingerprint::new(word.bits())?;
        self.stored = vec![fresh; self.k];
        Ok(Verdict::Answer(true))
    }

    /// Retrieves message bit `index` (0-based).
    pub fn retrieve<R: Rng + ?Sized>(
        &mut self,
        memory: &mut PublicMemory,
        index: usize,
        rng: &mut R,
    ) -> Result<Verdict> {
        let n = self.code.params().n;
        if index >= n {
            return Err(Error::IndexOutOfRange { index, len: n });
        }
        if !self.is_initialized() {
            return Err(Error::Uninitialized);
        }
        let (summaries0, reads0) = (memory.summary_log(), memory.read_log());

        let verdict = if self.verify(memory, rng)? {
            let plan = self.code.decode_query_plan(index, rng)?;
            let answers = plan
                .iter()
                .map(|&p| memory.read(p))
                .collect::<Result<Vec<_>>>()?;
            let bit = self.code.decode_from_answers(index, &plan, &answers)?;
            self.stored = (0..self.k)
                .map(|_| memory.summary())
                .collect::<Result<Vec<_>>>()?;
            Verdict::Answer(bit)
        } else {
            Verdict::Buggy
        };

        self.last_retrieve = Some(RetrieveLog {
            summaries: memory.summary_log() - summaries0,
            bit_reads: memory.read_log() - reads0,
            outcomes: self.last_outcomes.clone(),
            verdict,
        });
        Ok(verdict)
    }
}

/// Smallest `k` with `(1 − 2δ + 2δ²)^k ≤ ε`.
pub fn required_k(epsilon: f64, delta: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Domain {
            name: "epsilon",
            value: epsilon,
            reason: "must lie in (0, 1/2)",
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain {
            name: "delta",
            value: delta,
            reason: "must lie in (0, 1); at delta = 1 the states differ only by a global phase",
        });
    }
    let base = 1.0 - 2.0 * delta + 2.0 * delta * delta;
    let mut k = (epsilon.ln() / base.ln()).ceil().max(1.0) as usize;
    // The ratio of logs can land a hair off an integer; settle on the exact minimum.
    while k > 1 && base.powi(k as i32 - 1) <= epsilon {
        k -= 1;
    }
    while base.powi(k as i32) > epsilon {
        k += 1;
    }
    Ok(k)
}

pub fn complexity_report<C: LocallyDecodableCode>(
    state: &Checker<C>,
    last_retrieve: &RetrieveLog,
) -> ComplexityReport {
    let log_m = u64::from(qubits_for(state.code().params().m));
    ComplexityReport {
        s_qubits: state.k() as u64 * log_m,
        t_qubits_per_retrieve: last_retrieve.summaries * log_m + last_retrieve.bit_reads,
    }
}
