//! Closed-form acceptance probabilities and their verification.
//!
//! One SWAP test between fingerprints at relative distance `Δ` accepts with
//! probability `P₁(Δ) = 1 − 2Δ + 2Δ²`. An attack spread over `T` steps, each
//! checked against a freshly refreshed fingerprint, survives with probability
//! `P_T = Π P₁(Δᵢ)`, and `P_T ≤ P₁(ΣΔᵢ)`: spreading the corruption out never
//! helps the adversary. [`verify_lemma2`] checks that inequality by exhaustive
//! enumeration on a rational grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_SLACK: f64 = 1e-12;

fn check_fraction(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            reason: "must lie in [0, 1]",
        })
    }
}

/// Probability that one SWAP test accepts at relative distance `delta_frac`.
pub fn p_single(delta_frac: f64) -> Result<f64> {
    check_fraction("delta", delta_frac)?;
    Ok(1.0 - 2.0 * delta_frac + 2.0 * delta_frac * delta_frac)
}

/// Probability that every step of an incremental attack is accepted.
pub fn p_multi(deltas: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    let mut prod = 1.0;
    for &d in deltas {
        prod *= p_single(d)?;
        total += d;
    }
    if total > 1.0 + SUM_SLACK {
        return Err(Error::Domain {
            name: "sum of deltas",
            value: total,
            reason: "must not exceed 1",
        });
    }
    Ok(prod)
}

/// Upper bound `(1 − 2δ + 2δ²)^k` on accepting all `k` copies when memory sits at
/// relative distance at least `δ` (and at most `1 − δ`) from the stored codeword.
pub fn lemma1_bound(delta: f64, k: usize) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain {
            name: "delta",
            value: delta,
            reason: "must lie in (0, 1]",
        });
    }
    if k == 0 {
        return Err(Error::Domain {
            name: "k",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    Ok(p_single(delta)?.powi(k as i32))
}

pub fn std_error(p_hat: f64, samples: u64) -> f64 {
    if samples == 0 {
        return 0.0;
    }
    (p_hat * (1.0 - p_hat) / samples as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Empirical ≥ analytic − σ-multiple.
    AtLeast,
    /// Empirical ≤ analytic + σ-multiple.
    AtMost,
    /// |empirical − analytic| ≤ σ-multiple.
    Within,
}

/// An analytic value set against a Monte Carlo estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub label: String,
    pub analytic: f64,
    pub empirical: f64,
    pub samples: u64,
    pub std_error: f64,
    pub sigmas: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl BoundReport {
    pub fn from_counts(
        label: impl Into<String>,
        analytic: f64,
        hits: u64,
        samples: u64,
        comparison: Comparison,
        sigmas: f64,
    ) -> Self {
        let empirical = if samples == 0 {
            0.0
        } else {
            hits as f64 / samples as f64
        };
        let se = std_error(empirical, samples);
        let slack = sigmas * se + SUM_SLACK;
        let passed = samples > 0
            && match comparison {
                Comparison::AtLeast => empirical >= analytic - slack,
                Comparison::AtMost => empirical <= analytic + slack,
                Comparison::Within => (empirical - analytic).abs() <= slack,
            };
        BoundReport {
            label: label.into(),
            analytic,
            empirical,
            samples,
            std_error: se,
            sigmas,
            comparison,
            passed,
        }
    }
}

/// A composition for which `P_T` exceeded `P₁` of its sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Violation {
    pub deltas: Vec<f64>,
    pub p_multi: f64,
    pub p_single_of_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Report {
    pub grid_denominator: u32,
    pub t_max: usize,
    pub compositions_checked: u64,
    pub violations: u64,
    /// First few violations, if any.
    pub violation_examples: Vec<Lemma2Violation>,
    /// Smallest `P₁(ΣΔ) − P_T` seen over compositions with `T ≥ 2`.
    pub min_margin: f64,
    pub identity_pairs_checked: u64,
    /// Largest |(P₁ − P₂) − 4Δ₁Δ₂(Δ − Δ₁Δ₂)| over the grid.
    pub identity_max_error: f64,
    /// Largest |(P₁ − P₂) − 4Δ₁Δ₂(Δ + Δ₁Δ₂)| over the grid.
    pub plus_variant_max_error: f64,
    /// Whether the `+` variant agrees with direct subtraction everywhere.
    pub plus_variant_holds: bool,
    pub passed: bool,
}

/// `P₁(Δ₁+Δ₂) − P₂(Δ₁,Δ₂)` in closed form: `4Δ₁Δ₂(Δ − Δ₁Δ₂)` with `Δ = Δ₁ + Δ₂`.
pub fn two_step_gap(d1: f64, d2: f64) -> f64 {
    let total = d1 + d2;
    4.0 * d1 * d2 * (total - d1 * d2)
}

fn two_step_gap_plus_variant(d1: f64, d2: f64) -> f64 {
    let total = d1 + d2;
    4.0 * d1 * d2 * (total + d1 * d2)
}

/// Enumerates every `(Δ₁, …, Δ_T)` on the grid `{0, 1/D, …, 1}` with `ΣΔᵢ ≤ 1`
/// and `T ≤ t_max`, checking `P_T ≤ P₁(ΣΔᵢ)`; also checks the two-step gap
/// formula against direct subtraction on every grid pair.
pub fn verify_lemma2(grid_denominator: u32, t_max: usize) -> Result<Lemma2Report> {
    if grid_denominator == 0 {
        return Err(Error::Domain {
            name: "grid_denominator",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    if t_max < 2 {
        return Err(Error::Domain {
            name: "t_max",
            value: t_max as f64,
            reason: "must be at least 2",
        });
    }
    let denom = grid_denominator as usize;
    let scale = |c: usize| c as f64 / denom as f64;
    const TOL: f64 = 1e-12;

    let mut report = Lemma2Report {
        grid_denominator,
        t_max,
        compositions_checked: 0,
        violations: 0,
        violation_examples: Vec::new(),
        min_margin: f64::INFINITY,
        identity_pairs_checked: 0,
        identity_max_error: 0.0,
        plus_variant_max_error: 0.0,
        plus_variant_holds: true,
        passed: false,
    };

    let mut parts = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        for_each_composition(t, denom, &mut parts, &mut |counts| {
            let deltas: Vec<f64> = counts.iter().map(|&c| scale(c)).collect();
            let total = scale(counts.iter().sum());
            let multi = p_multi(&deltas).expect("grid point in domain");
            let single = p_single(total).expect("grid point in domain");
            report.compositions_checked += 1;
            if t >= 2 {
                report.min_margin = report.min_margin.min(single - multi);
            }
            if multi > single + TOL {
                report.violations += 1;
                if report.violation_examples.len() < 10 {
                    report.violation_examples.push(Lemma2Violation {
                        deltas,
                        p_multi: multi,
                        p_single_of_sum: single,
                    });
                }
            }
        });
    }

    for c1 in 0..=denom {
        for c2 in 0..=denom - c1 {
            let (d1, d2) = (scale(c1), scale(c2));
            let direct = p_single(d1 + d2)? - p_multi(&[d1, d2])?;
            report.identity_pairs_checked += 1;
            report.identity_max_error = report
                .identity_max_error
                .max((direct - two_step_gap(d1, d2)).abs());
            report.plus_variant_max_error = report
                .plus_variant_max_error
                .max((direct - two_step_gap_plus_variant(d1, d2)).abs());
        }
    }
    report.plus_variant_holds = report.plus_variant_max_error <= TOL;
    report.passed = report.violations == 0 && report.identity_max_error <= TOL;
    Ok(report)
}

/// Calls `f` with every tuple of `t` non-negative integers summing to at most `budget`.
fn for_each_composition(
    t: usize,
    budget: usize,
    parts: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]),
) {
    if parts.len() == t {
        f(parts);
        return;
    }
    for c in 0..=budget {
        parts.push(c);
        for_each_composition(t, budget - c, parts, f);
        parts.pop();
    }
}
