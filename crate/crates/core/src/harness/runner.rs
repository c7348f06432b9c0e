//! Monte Carlo experiment runner.
//!
//! Each trial is an independent session: a fresh checker, public memory and
//! adversary, driven through the configured script with its own RNG from
//! [`derive_trial_seed`](super::seed::derive_trial_seed). Sessions end at the
//! first `Buggy` verdict. Trials run in parallel; outcomes are folded in trial
//! order, so results depend only on the config.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Op, Script};
use super::seed::trial_rng;
use crate::adversary::{Adversary, AttackSchedule};
use crate::analysis::{lemma1_bound, p_single, std_error, BoundReport, Comparison};
use crate::checker::{
    complexity_report, required_k, Checker, ComplexityReport, PublicMemory, Verdict,
};
use crate::code::{CodeParams, HadamardCode, LocallyDecodableCode, Message};
use crate::error::Result;

/// σ-multiple used by every built-in empirical-vs-analytic check.
pub const CHECK_SIGMAS: f64 = 4.0;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub hits: u64,
    pub samples: u64,
    pub rate: f64,
    pub std_error: f64,
}

impl Rate {
    pub fn new(hits: u64, samples: u64) -> Self {
        let rate = if samples == 0 {
            0.0
        } else {
            hits as f64 / samples as f64
        };
        Rate {
            hits,
            samples,
            rate,
            std_error: std_error(rate, samples),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: u64,
    /// Sessions that ended in `Buggy`.
    pub buggy: Rate,
    /// Sessions in which every SWAP test accepted.
    pub all_accept: Rate,
    /// `Buggy` while memory still held the last stored codeword.
    pub false_buggy: Rate,
    /// `Buggy` among sessions whose memory was found corrupted at some verification.
    pub detection: Rate,
    /// Answers equal to the last stored bit, over all answers.
    pub correctness: Rate,
    /// The same, restricted to answers given on uncorrupted memory.
    pub honest_correctness: Rate,
    /// Acceptance of the i-th verification among sessions that reached it.
    pub per_verification: Vec<Rate>,
    pub max_t_qubits_per_retrieve: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSummary {
    pub k: usize,
    /// Copies needed for `epsilon` at the code's distance.
    pub required_k: usize,
    pub delta: f64,
    /// `(1 − 2δ + 2δ²)^k`.
    pub lemma1_bound: f64,
    /// Probability that every verification accepts, when the script and
    /// schedule determine it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_all_accept: Option<f64>,
    /// Per-verification acceptance probabilities behind `predicted_all_accept`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_per_verification: Option<Vec<f64>>,
    /// `⟨ψ_x|ψ_x̃⟩` for distinct codewords, for codes with a constant distance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub codeword_inner_product: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpRecord {
    pub op: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub trial: u64,
    pub ops: Vec<OpRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub elapsed_ms: u128,
    pub threads: usize,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub code: CodeParams,
    pub aggregate: Aggregate,
    pub analytic: AnalyticSummary,
    pub checks: Vec<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complexity: Option<ComplexityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdicts: Option<Vec<SessionRecord>>,
    pub metadata: RunMetadata,
}

impl ExperimentResult {
    pub fn all_checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Default)]
struct SessionOutcome {
    buggy: bool,
    false_buggy: bool,
    corrupted: bool,
    answers: u64,
    correct: u64,
    honest_answers: u64,
    honest_correct: u64,
    verifications: Vec<bool>,
    complexity: Option<ComplexityReport>,
    max_t: u64,
    record: Option<SessionRecord>,
}

/// The operations of one session. `Mixed` draws store/retrieve kinds from `rng`.
fn session_ops<R: Rng + ?Sized>(
    script: &Script,
    attack_steps: usize,
    rng: Option<&mut R>,
) -> Vec<Op> {
    match script {
        Script::Default => {
            let mut ops = vec![Op::Store(None)];
            for _ in 0..attack_steps {
                ops.push(Op::Attack);
                ops.push(Op::Retrieve(None));
            }
            ops
        }
        Script::Mixed {
            operations,
            store_fraction,
        } => {
            let mut rng = rng;
            let mut ops = vec![Op::Store(None)];
            for i in 0..*operations {
                if i < attack_steps {
                    ops.push(Op::Attack);
                }
                let store = match rng.as_deref_mut() {
                    Some(r) => r.random::<f64>() < *store_fraction,
                    None => false,
                };
                ops.push(if store {
                    Op::Store(None)
                } else {
                    Op::Retrieve(None)
                });
            }
            ops
        }
        Script::Explicit { ops } => ops.clone(),
    }
}

fn run_session(
    config: &ExperimentConfig,
    code: HadamardCode,
    k: usize,
    trial: u64,
) -> Result<SessionOutcome> {
    let mut rng = trial_rng(config.seed, trial);
    let n = code.params().n;
    let ops = session_ops(&config.script, config.attack.steps(), Some(&mut rng));

    let mut checker = Checker::new(code, k, config.epsilon)?;
    let mut memory = PublicMemory::new();
    let mut adversary = Adversary::new(config.attack.clone(), code);
    let mut attack_step = 0;
    let mut stored: Option<(Message, Vec<bool>)> = None;
    let mut out = SessionOutcome::default();
    let mut records = Vec::new();

    for op in ops {
        let label = op.to_string();
        let verdict = match op {
            Op::Attack => {
                adversary.apply_step(attack_step, &mut memory, &mut rng)?;
                attack_step += 1;
                None
            }
            Op::Store(msg) => {
                let msg = match (msg, &config.message, &stored) {
                    (Some(m), _, _) => m,
                    (None, Some(m), None) => m.clone(),
                    _ => Message::random(n, &mut rng)?,
                };
                let corrupted = is_corrupted(&stored, &memory);
                out.corrupted |= corrupted;
                let verified = stored.is_some();
                let v = checker.store(&mut memory, &msg, &mut rng)?;
                if verified {
                    out.verifications.push(!v.is_buggy());
                }
                if v.is_buggy() {
                    out.false_buggy = !corrupted;
                } else {
                    let word = code.encode(&msg)?.into_bits();
                    stored = Some((msg, word));
                }
                Some(v)
            }
            Op::Retrieve(index) => {
                let j = index.unwrap_or_else(|| rng.random_range(0..n));
                let corrupted = is_corrupted(&stored, &memory);
                out.corrupted |= corrupted;
                let v = checker.retrieve(&mut memory, j, &mut rng)?;
                out.verifications.push(!v.is_buggy());
                match v {
                    Verdict::Buggy => out.false_buggy = !corrupted,
                    Verdict::Answer(bit) => {
                        let right = stored.as_ref().and_then(|(m, _)| m.get(j)) == Some(bit);
                        out.answers += 1;
                        out.correct += u64::from(right);
                        if !corrupted {
                            out.honest_answers += 1;
                            out.honest_correct += u64::from(right);
                        }
                        let log = checker.last_retrieve().expect("retrieve logs itself");
                        let report = complexity_report(&checker, log);
                        out.max_t = out.max_t.max(report.t_qubits_per_retrieve);
                        out.complexity = Some(report);
                    }
                }
                Some(v)
            }
        };
        if config.record_verdicts {
            records.push(OpRecord { op: label, verdict });
        }
        if verdict == Some(Verdict::Buggy) {
            out.buggy = true;
            break;
        }
    }
    if config.record_verdicts {
        out.record = Some(SessionRecord {
            trial,
            ops: records,
        });
    }
    Ok(out)
}

fn is_corrupted(stored: &Option<(Message, Vec<bool>)>, memory: &PublicMemory) -> bool {
    match stored {
        Some((_, word)) => memory.contents() != word.as_slice(),
        None => false,
    }
}

/// Acceptance probability of each verification along the all-accept path, for
/// scripts and schedules where it is determined.
fn predict_per_verification(
    config: &ExperimentConfig,
    code: &HadamardCode,
    k: usize,
) -> Option<Vec<f64>> {
    let params = code.params();
    let m = params.m;
    let ops = session_ops::<rand::rngs::ThreadRng>(&config.script, config.attack.steps(), None);
    let flips = config.attack.flip_counts(m);
    let copies = |p: f64| p.powi(k as i32);

    let mut factors = Vec::new();
    let mut initialized = false;
    // Distance, in bits, between memory and the checker's private fingerprints.
    let mut pending = 0usize;
    // Acceptance of a substitution still awaiting verification.
    let mut substitution: Option<f64> = None;
    // Last stored message, when it is fixed rather than drawn per session.
    let mut last_msg: Option<Message> = None;
    let mut attack_step = 0;

    for op in ops {
        match op {
            Op::Attack => {
                match &config.attack {
                    AttackSchedule::NoOp { .. } => {}
                    AttackSchedule::FlipCount { .. } | AttackSchedule::Incremental { .. } => {
                        if substitution.is_some() {
                            return None;
                        }
                        pending += flips.as_ref()?[attack_step];
                    }
                    AttackSchedule::SubstituteCodeword { target } => {
                        if pending != 0 {
                            return None;
                        }
                        let differ =
                            copies(p_single(code.constant_distance()? as f64 / m as f64).ok()?);
                        substitution = Some(match (target, &last_msg) {
                            (None, _) => differ,
                            (Some(t), Some(x)) if t == x => 1.0,
                            (Some(_), Some(_)) => differ,
                            (Some(_), None) => {
                                let same = 0.5f64.powi(params.n as i32);
                                (1.0 - same) * differ + same
                            }
                        });
                    }
                }
                attack_step += 1;
            }
            Op::Store(msg) if !initialized => {
                initialized = true;
                last_msg = msg.or_else(|| config.message.clone());
            }
            Op::Store(_) | Op::Retrieve(_) => {
                let p = match substitution.take() {
                    Some(p) => p,
                    None => copies(p_single(pending as f64 / m as f64).ok()?),
                };
                factors.push(p);
                pending = 0;
                if let Op::Store(msg) = op {
                    last_msg = msg;
                }
            }
        }
    }
    Some(factors)
}

fn analytic_summary(
    config: &ExperimentConfig,
    code: &HadamardCode,
    k: usize,
) -> Result<AnalyticSummary> {
    let params = code.params();
    let per = predict_per_verification(config, code, k);
    Ok(AnalyticSummary {
        k,
        required_k: required_k(config.epsilon, params.delta)?,
        delta: params.delta,
        lemma1_bound: lemma1_bound(params.delta, k)?,
        predicted_all_accept: per.as_ref().map(|f| f.iter().product()),
        predicted_per_verification: per,
        codeword_inner_product: code
            .constant_distance()
            .map(|c| (params.m as f64 - 2.0 * c as f64) / params.m as f64),
    })
}

fn built_in_checks(
    config: &ExperimentConfig,
    params: &CodeParams,
    agg: &Aggregate,
    analytic: &AnalyticSummary,
) -> Vec<BoundReport> {
    let mut checks = Vec::new();
    let from = |label: &str, analytic: f64, r: &Rate, cmp| {
        BoundReport::from_counts(label, analytic, r.hits, r.samples, cmp, CHECK_SIGMAS)
    };
    if matches!(config.attack, AttackSchedule::NoOp { .. }) {
        checks.push(from("buggy_rate", 0.0, &agg.buggy, Comparison::Within));
        if agg.correctness.samples > 0 {
            checks.push(from(
                "correctness_rate",
                1.0,
                &agg.correctness,
                Comparison::Within,
            ));
        }
    } else {
        if agg.false_buggy.samples > 0 {
            checks.push(from(
                "false_buggy_rate",
                0.0,
                &agg.false_buggy,
                Comparison::Within,
            ));
        }
        if let Some(p) = analytic.predicted_all_accept {
            checks.push(from(
                "all_accept_rate",
                p,
                &agg.all_accept,
                Comparison::Within,
            ));
        }
        let reaches_codeword = match &config.attack {
            AttackSchedule::SubstituteCodeword { .. } => true,
            schedule => schedule.flip_counts(params.m).is_some_and(|c| {
                let total = c.iter().sum::<usize>() as f64 / params.m as f64;
                total >= params.delta - 1e-12 && total <= 1.0 - params.delta + 1e-12
            }),
        };
        if reaches_codeword && agg.detection.samples > 0 {
            checks.push(from(
                "detection_rate",
                1.0 - analytic.lemma1_bound,
                &agg.detection,
                Comparison::AtLeast,
            ));
        }
    }
    checks
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let started = Instant::now();
    let code = config.build_code()?;
    let k = config.resolved_k()?;
    let params = code.params();

    let outcomes = (0..config.trials)
        .into_par_iter()
        .map(|t| run_session(config, code, k, t))
        .collect::<Result<Vec<_>>>()?;

    let mut buggy = 0;
    let mut false_buggy = 0;
    let mut corrupted = 0;
    let mut detected = 0;
    let (mut answers, mut correct, mut honest_answers, mut honest_correct) = (0, 0, 0, 0);
    let mut reached: Vec<u64> = Vec::new();
    let mut accepted: Vec<u64> = Vec::new();
    let mut max_t = 0;
    let mut complexity = None;
    let mut records = config.record_verdicts.then(Vec::new);

    for o in outcomes {
        buggy += u64::from(o.buggy);
        false_buggy += u64::from(o.buggy && o.false_buggy);
        corrupted += u64::from(o.corrupted);
        detected += u64::from(o.corrupted && o.buggy && !o.false_buggy);
        answers += o.answers;
        correct += o.correct;
        honest_answers += o.honest_answers;
        honest_correct += o.honest_correct;
        for (i, &ok) in o.verifications.iter().enumerate() {
            if reached.len() <= i {
                reached.push(0);
                accepted.push(0);
            }
            reached[i] += 1;
            accepted[i] += u64::from(ok);
        }
        max_t = max_t.max(o.max_t);
        if complexity.is_none() {
            complexity = o.complexity;
        }
        if let (Some(all), Some(r)) = (records.as_mut(), o.record) {
            all.push(r);
        }
    }

    let trials = config.trials;
    let aggregate = Aggregate {
        trials,
        buggy: Rate::new(buggy, trials),
        all_accept: Rate::new(trials - buggy, trials),
        false_buggy: Rate::new(false_buggy, trials),
        detection: Rate::new(detected, corrupted),
        correctness: Rate::new(correct, answers),
        honest_correctness: Rate::new(honest_correct, honest_answers),
        per_verification: reached
            .iter()
            .zip(&accepted)
            .map(|(&r, &a)| Rate::new(a, r))
            .collect(),
        max_t_qubits_per_retrieve: max_t,
    };
    let analytic = analytic_summary(config, &code, k)?;
    let checks = built_in_checks(config, &params, &aggregate, &analytic);

    Ok(ExperimentResult {
        config: config.clone(),
        code: params,
        aggregate,
        analytic,
        checks,
        complexity,
        verdicts: records,
        metadata: RunMetadata {
            elapsed_ms: started.elapsed().as_millis(),
            threads: rayon::current_num_threads(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::PositionPolicy;
    use crate::harness::config::Copies;

    fn config(n: usize, k: usize, attack: AttackSchedule, trials: u64) -> ExperimentConfig {
        ExperimentConfig::from_toml_str(&format!(
            "n = {n}\nepsilon = 0.01\nk = {k}\ntrials = {trials}\nseed = 5\n"
        ))
        .map(|mut c| {
            c.attack = attack;
            c
        })
        .unwrap()
    }

    #[test]
    fn honest_sessions_are_perfect() {
        let mut c = config(5, 3, AttackSchedule::NoOp { steps: 4 }, 500);
        c.script = Script::Mixed {
            operations: 8,
            store_fraction: 0.3,
        };
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.aggregate.buggy.hits, 0);
        assert_eq!(r.aggregate.correctness.rate, 1.0);
        assert!(r.aggregate.correctness.samples > 0);
        assert!(r.all_checks_passed());
        assert_eq!(r.analytic.predicted_all_accept, Some(1.0));
    }

    #[test]
    fn substitution_prediction_uses_orthogonality() {
        let c = config(
            4,
            7,
            AttackSchedule::SubstituteCodeword { target: None },
            10,
        );
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.analytic.codeword_inner_product, Some(0.0));
        assert_eq!(r.analytic.predicted_all_accept, Some(0.0078125));
        assert_eq!(r.analytic.lemma1_bound, 0.0078125);
    }

    #[test]
    fn fixed_target_prediction_accounts_for_collisions() {
        let mut c = config(
            2,
            1,
            AttackSchedule::SubstituteCodeword {
                target: Some("11".parse().unwrap()),
            },
            10,
        );
        // Random messages hit the target a quarter of the time.
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.analytic.predicted_all_accept, Some(0.75 * 0.5 + 0.25));
        c.message = Some("11".parse().unwrap());
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.analytic.predicted_all_accept, Some(1.0));
    }

    #[test]
    fn incremental_prediction_is_the_step_product() {
        let c = config(
            3,
            1,
            AttackSchedule::Incremental {
                deltas: vec![0.25, 0.25],
                policy: PositionPolicy::Uniform,
            },
            10,
        );
        let r = run_experiment(&c).unwrap();
        assert_eq!(
            r.analytic.predicted_per_verification,
            Some(vec![0.625, 0.625])
        );
        assert_eq!(r.analytic.predicted_all_accept, Some(0.390625));
    }

    #[test]
    fn explicit_script_prediction_accumulates_pending_flips() {
        let mut c = config(
            3,
            2,
            AttackSchedule::FlipCount {
                bits_per_step: 1,
                steps: 3,
                policy: PositionPolicy::Prefix,
            },
            10,
        );
        c.script = Script::Explicit {
            ops: [
                "store", "attack", "attack", "retrieve", "attack", "store", "retrieve",
            ]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect(),
        };
        let r = run_experiment(&c).unwrap();
        let p = |d: f64| p_single(d / 8.0).unwrap().powi(2);
        assert_eq!(
            r.analytic.predicted_per_verification,
            Some(vec![p(2.0), p(1.0), 1.0])
        );
    }

    #[test]
    fn results_do_not_depend_on_thread_scheduling() {
        let c = config(
            4,
            2,
            AttackSchedule::Incremental {
                deltas: vec![0.125, 0.25],
                policy: PositionPolicy::Uniform,
            },
            2000,
        );
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert_eq!(a.aggregate, b.aggregate);
        let mut c2 = c.clone();
        c2.seed = 6;
        assert_ne!(run_experiment(&c2).unwrap().aggregate, a.aggregate);
    }

    #[test]
    fn verdict_streams_are_recorded_on_request() {
        let mut c = config(3, 1, AttackSchedule::NoOp { steps: 2 }, 3);
        c.record_verdicts = true;
        let r = run_experiment(&c).unwrap();
        let v = r.verdicts.unwrap();
        assert_eq!(v.len(), 3);
        let ops: Vec<&str> = v[0].ops.iter().map(|o| o.op.as_str()).collect();
        assert_eq!(ops, ["store", "attack", "retrieve", "attack", "retrieve"]);
        assert_eq!(v[0].ops[0].verdict, Some(Verdict::Answer(true)));
        assert_eq!(v[0].ops[1].verdict, None);
    }

    #[test]
    fn complexity_is_reported_from_completed_retrieves() {
        let mut c = config(8, 7, AttackSchedule::NoOp { steps: 1 }, 4);
        c.k = Copies::Fixed(7);
        let r = run_experiment(&c).unwrap();
        assert_eq!(
            r.complexity,
            Some(ComplexityReport {
                s_qubits: 56,
                t_qubits_per_retrieve: 114
            })
        );
        assert_eq!(r.aggregate.max_t_qubits_per_retrieve, 114);
    }

    #[test]
    fn invalid_configs_are_rejected_before_running() {
        let c = config(3, 0, AttackSchedule::NoOp { steps: 1 }, 3);
        assert!(run_experiment(&c).is_err());
    }
}
