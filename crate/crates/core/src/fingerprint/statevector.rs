//! Dense statevector simulation of the controlled-SWAP test.
//!
//! Used as an oracle for [`super::swap_accept_prob`]: it prepares
//! `|0⟩|ψ_a⟩|ψ_b⟩`, applies H, a Fredkin gate per qubit pair, H, and reads the
//! control's probability of 0 off the amplitudes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{swap_accept_prob, Fingerprint};
use crate::error::{Error, Result};

/// Largest fingerprint length simulated densely (13 qubits in total).
pub const MAX_ORACLE_M: usize = 64;

/// A register of qubits. Qubit `i` is bit `i` of the basis-state index.
#[derive(Clone, Debug)]
pub struct StateVector {
    amps: Vec<Complex64>,
    qubits: usize,
}

impl StateVector {
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::OracleUnsupported(format!(
                "amplitude count {} is not a power of two",
                amps.len()
            )));
        }
        let qubits = amps.len().trailing_zeros() as usize;
        Ok(StateVector { amps, qubits })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_h(&mut self, q: usize) {
        let bit = 1 << q;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = (a0 + a1) * s;
                self.amps[i | bit] = (a0 - a1) * s;
            }
        }
    }

    /// Fredkin gate: swaps qubits `t1` and `t2` where `control` is 1.
    pub fn apply_cswap(&mut self, control: usize, t1: usize, t2: usize) {
        let (c, b1, b2) = (1 << control, 1 << t1, 1 << t2);
        for i in 0..self.amps.len() {
            // Visit each swapped pair once, from the side with t1 = 1, t2 = 0.
            if i & c != 0 && i & b1 != 0 && i & b2 == 0 {
                self.amps.swap(i, (i & !b1) | b2);
            }
        }
    }

    pub fn prob_zero(&self, q: usize) -> f64 {
        let bit = 1 << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// Probability of measuring the SWAP-test control as 0, by dense simulation.
pub fn cswap_statevector_prob(a: &Fingerprint, b: &Fingerprint) -> Result<f64> {
    let m = a.m();
    if b.m() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: b.m(),
        });
    }
    if !m.is_power_of_two() {
        return Err(Error::OracleUnsupported(format!(
            "m = {m} is not a power of two"
        )));
    }
    if m > MAX_ORACLE_M {
        return Err(Error::OracleUnsupported(format!(
            "m = {m} exceeds the dense limit {MAX_ORACLE_M}"
        )));
    }
    let r = m.trailing_zeros() as usize;
    // Layout: register b on qubits [0, r), register a on [r, 2r), control on 2r.
    let control = 2 * r;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (2 * r + 1)];
    for i in 0..m {
        for j in 0..m {
            amps[(i << r) | j] = Complex64::new(a.amplitude(i) * b.amplitude(j), 0.0);
        }
    }
    let mut state = StateVector::from_amplitudes(amps)?;
    state.apply_h(control);
    for k in 0..r {
        state.apply_cswap(control, r + k, k);
    }
    state.apply_h(control);
    Ok(state.prob_zero(control))
}

/// Agreement between the analytic and simulated acceptance at one size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub m: usize,
    pub pairs: usize,
    pub max_abs_error: f64,
}

/// Compares [`swap_accept_prob`] with [`cswap_statevector_prob`] on `pairs`
/// random phase patterns for each size in `sizes`.
pub fn oracle_check(sizes: &[usize], pairs: usize, seed: u64) -> Result<Vec<OracleReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sizes
        .iter()
        .map(|&m| {
            let mut max_abs_error = 0.0f64;
            for _ in 0..pairs {
                let mut draw = || -> Result<Fingerprint> {
                    Fingerprint::new(&(0..m).map(|_| rng.random::<bool>()).collect::<Vec<_>>())
                };
                let (a, b) = (draw()?, draw()?);
                let err = (cswap_statevector_prob(&a, &b)? - swap_accept_prob(&a, &b)?).abs();
                max_abs_error = max_abs_error.max(err);
            }
            Ok(OracleReport {
                m,
                pairs,
                max_abs_error,
            })
        })
        .collect()
}
