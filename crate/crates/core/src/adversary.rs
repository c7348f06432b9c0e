//! Scripted corruption of the public memory.
//!
//! An [`Adversary`] executes one step of its [`AttackSchedule`] at a time,
//! between user operations. Flip-based schedules only ever touch positions they
//! have not flipped before, so the memory drifts monotonically away from the
//! codeword it started from.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::checker::PublicMemory;
use crate::code::{hamming_distance, CodeParams, LocallyDecodableCode, Message};
use crate::error::{Error, Result};

/// How fresh flip positions are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionPolicy {
    /// Uniformly among positions not yet flipped.
    #[default]
    Uniform,
    /// The lowest-indexed positions not yet flipped.
    Prefix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AttackSchedule {
    NoOp {
        #[serde(default = "one")]
        steps: usize,
    },
    /// Overwrite memory with the codeword of another message in a single step.
    /// Without a target, a random message whose codeword differs from memory is used.
    SubstituteCodeword {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<Message>,
    },
    /// Flip `bits_per_step` fresh positions in each of `steps` steps.
    FlipCount {
        bits_per_step: usize,
        steps: usize,
        #[serde(default)]
        policy: PositionPolicy,
    },
    /// Flip `round(Δᵢ·m)` fresh positions at step `i`.
    Incremental {
        deltas: Vec<f64>,
        #[serde(default)]
        policy: PositionPolicy,
    },
}

fn one() -> usize {
    1
}

impl Default for AttackSchedule {
    fn default() -> Self {
        AttackSchedule::NoOp { steps: 1 }
    }
}

impl AttackSchedule {
    /// Number of adversary steps `T`.
    pub fn steps(&self) -> usize {
        match self {
            AttackSchedule::NoOp { steps } => *steps,
            AttackSchedule::SubstituteCodeword { .. } => 1,
            AttackSchedule::FlipCount { steps, .. } => *steps,
            AttackSchedule::Incremental { deltas, .. } => deltas.len(),
        }
    }

    /// Bits flipped at each step, for flip-based schedules.
    pub fn flip_counts(&self, m: usize) -> Option<Vec<usize>> {
        match self {
            AttackSchedule::FlipCount {
                bits_per_step,
                steps,
                ..
            } => Some(vec![*bits_per_step; *steps]),
            AttackSchedule::Incremental { deltas, .. } => {
                Some(deltas.iter().map(|&d| round_bits(d, m)).collect())
            }
            _ => None,
        }
    }

    /// Checks the schedule against a code. With `require_reach`, flip schedules
    /// must accumulate at least `δ·m` flips.
    pub fn validate(&self, params: &CodeParams, require_reach: bool) -> Result<()> {
        let m = params.m;
        match self {
            AttackSchedule::NoOp { .. } => {}
            AttackSchedule::SubstituteCodeword { target } => {
                if let Some(t) = target {
                    if t.len() != params.n {
                        return Err(Error::config(
                            "attack.target",
                            format!("has {} bits, message length is {}", t.len(), params.n),
                        ));
                    }
                }
            }
            AttackSchedule::FlipCount {
                bits_per_step,
                steps,
                ..
            } => {
                if bits_per_step.saturating_mul(*steps) > m {
                    return Err(Error::config(
                        "attack.bits_per_step",
                        format!("{bits_per_step} × {steps} steps exceeds m = {m}"),
                    ));
                }
            }
            AttackSchedule::Incremental { deltas, .. } => {
                for (i, &d) in deltas.iter().enumerate() {
                    if !(d.is_finite() && d >= 0.0) {
                        return Err(Error::config(
                            format!("attack.deltas[{i}]"),
                            "must be a finite fraction ≥ 0",
                        ));
                    }
                }
                if deltas.iter().sum::<f64>() > 1.0 + 1e-12 {
                    return Err(Error::config("attack.deltas", "fractions sum past 1"));
                }
                let total: usize = deltas.iter().map(|&d| round_bits(d, m)).sum();
                if total > m {
                    return Err(Error::config(
                        "attack.deltas",
                        format!("rounded flip counts total {total} > m = {m}"),
                    ));
                }
            }
        }
        if require_reach && !codeword_reachability_check(self, params) {
            return Err(Error::config(
                "attack",
                format!(
                    "schedule never accumulates δ·m = {} flips",
                    params.delta * m as f64
                ),
            ));
        }
        Ok(())
    }
}

/// `Δ·m` rounded to the nearest whole bit.
pub fn round_bits(fraction: f64, m: usize) -> usize {
    (fraction * m as f64).round() as usize
}

/// Whether the schedule can move memory a full minimum distance away.
/// For flip schedules this is `Σ dᵢ ≥ δ·m` on the rounded counts.
pub fn codeword_reachability_check(schedule: &AttackSchedule, params: &CodeParams) -> bool {
    match schedule {
        AttackSchedule::NoOp { .. } => false,
        AttackSchedule::SubstituteCodeword { .. } => true,
        _ => {
            let total: usize = schedule
                .flip_counts(params.m)
                .map(|c| c.iter().sum())
                .unwrap_or(0);
            total as f64 >= params.delta * params.m as f64 - 1e-9
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub flipped: Vec<usize>,
    /// Hamming distance from the memory as first seen, over `m`.
    pub cumulative_distance: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AdversaryLog {
    pub steps: Vec<StepRecord>,
}

pub struct Adversary<C> {
    schedule: AttackSchedule,
    code: C,
    original: Option<Vec<bool>>,
    touched: Vec<bool>,
    log: AdversaryLog,
}

impl<C: LocallyDecodableCode> Adversary<C> {
    pub fn new(schedule: AttackSchedule, code: C) -> Self {
        Adversary {
            schedule,
            code,
            original: None,
            touched: Vec::new(),
            log: AdversaryLog::default(),
        }
    }

    pub fn schedule(&self) -> &AttackSchedule {
        &self.schedule
    }

    pub fn log(&self) -> &AdversaryLog {
        &self.log
    }

    /// Runs step `step` (0-based) against `memory`.
    pub fn apply_step<R: Rng + ?Sized>(
        &mut self,
        step: usize,
        memory: &mut PublicMemory,
        rng: &mut R,
    ) -> Result<&StepRecord> {
        let steps = self.schedule.steps();
        if step >= steps {
            return Err(Error::StepOutOfRange { step, steps });
        }
        if !memory.is_initialized() {
            return Err(Error::Uninitialized);
        }
        let m = memory.len();
        let original = self
            .original
            .get_or_insert_with(|| memory.contents().to_vec())
            .clone();
        if self.touched.len() != m {
            self.touched = vec![false; m];
        }

        let flipped = match &self.schedule {
            AttackSchedule::NoOp { .. } => Vec::new(),
            AttackSchedule::SubstituteCodeword { target } => {
                let word = match target {
                    Some(t) => self.code.encode(t)?,
                    None => loop {
                        let cand = Message::random(self.code.params().n, rng)?;
                        let word = self.code.encode(&cand)?;
                        if word.bits() != memory.contents() {
                            break word;
                        }
                    },
                };
                let changed: Vec<usize> = (0..m)
                    .filter(|&i| word.bits()[i] != memory.contents()[i])
                    .collect();
                memory.write(&word)?;
                changed
            }
            AttackSchedule::FlipCount { policy, .. }
            | AttackSchedule::Incremental { policy, .. } => {
                let count = self.schedule.flip_counts(m).expect("flip schedule")[step];
                let fresh: Vec<usize> = (0..m).filter(|&i| !self.touched[i]).collect();
                if count > fresh.len() {
                    return Err(Error::ExhaustedPositions {
                        wanted: count,
                        available: fresh.len(),
                    });
                }
                let mut chosen: Vec<usize> = match policy {
                    PositionPolicy::Prefix => fresh[..count].to_vec(),
                    PositionPolicy::Uniform => index::sample(rng, fresh.len(), count)
                        .into_iter()
                        .map(|i| fresh[i])
                        .collect(),
                };
                chosen.sort_unstable();
                for &p in &chosen {
                    memory.flip(p)?;
                }
                chosen
            }
        };
        for &p in &flipped {
            self.touched[p] = true;
        }
        let cumulative_distance = hamming_distance(&original, memory.contents())? as f64 / m as f64;
        self.log.steps.push(StepRecord {
            step,
            flipped,
            cumulative_distance,
        });
        Ok(self.log.steps.last().expect("just pushed"))
    }
}
