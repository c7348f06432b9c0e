use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use qomc::analysis::{lemma1_bound, p_multi, p_single, verify_lemma2};
use qomc::checker::required_k;
use qomc::fingerprint::statevector::{oracle_check, MAX_ORACLE_M};
use qomc::harness::output::{to_csv, to_json};
use qomc::harness::{run_experiment, write_outputs, ExperimentConfig, OutputFormat};
use qomc::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "qomc",
    version,
    about = "Quantum online memory checker simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment described by a TOML config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, env = "QOMC_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        /// Directory for result files; without it the result goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<OutputFormat>,
        /// Exit with status 2 when any built-in analytic check fails.
        #[arg(long)]
        check: bool,
    },
    /// Evaluate the closed-form bounds.
    Bounds {
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        /// Copies to evaluate the bound at; defaults to the required count.
        #[arg(long)]
        k: Option<usize>,
        /// Per-step flip fractions for the multi-step acceptance.
        #[arg(long, value_delimiter = ',')]
        deltas: Vec<f64>,
        #[arg(long)]
        format: Option<OutputFormat>,
    },
    /// Exhaustively check that splitting an attack never raises its acceptance.
    VerifyLemma2 {
        /// Grid denominator D: fractions range over 0, 1/D, ..., 1.
        #[arg(long, default_value_t = 20)]
        grid: u32,
        #[arg(long, default_value_t = 4)]
        t_max: usize,
        #[arg(long)]
        format: Option<OutputFormat>,
    },
    /// Compare analytic SWAP-test probabilities with a dense statevector simulation.
    OracleCheck {
        #[arg(long, default_value_t = 200)]
        pairs: usize,
        #[arg(long, env = "QOMC_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        max_m: usize,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        #[arg(long)]
        format: Option<OutputFormat>,
    },
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    println!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct BoundsOutput {
    epsilon: f64,
    delta: f64,
    required_k: usize,
    k: usize,
    p_single: f64,
    lemma1_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_multi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_single_of_sum: Option<f64>,
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Simulate {
            config,
            seed,
            trials,
            out,
            format,
            check,
        } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            let format = format.or(cfg.output.format);
            let out = out.or_else(|| cfg.output.dir.clone());
            let result = run_experiment(&cfg)?;
            match out {
                Some(dir) => {
                    for path in write_outputs(&result, &dir, format)? {
                        eprintln!("wrote {}", path.display());
                    }
                }
                None => match format {
                    Some(OutputFormat::Csv) => print!("{}", to_csv(&result)?),
                    _ => println!("{}", to_json(&result)?),
                },
            }
            for c in &result.checks {
                eprintln!(
                    "{} {}: empirical {:.6} ± {:.6} vs analytic {:.6} ({:?})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.label,
                    c.empirical,
                    c.std_error,
                    c.analytic,
                    c.comparison
                );
            }
            Ok(if check && !result.all_checks_passed() {
                EXIT_CHECK_FAILED
            } else {
                0
            })
        }
        Command::Bounds {
            epsilon,
            delta,
            k,
            deltas,
            format,
        } => {
            let required = required_k(epsilon, delta)?;
            let k = k.unwrap_or(required);
            let (multi, single_of_sum) = if deltas.is_empty() {
                (None, None)
            } else {
                (
                    Some(p_multi(&deltas)?),
                    Some(p_single(deltas.iter().sum::<f64>().min(1.0))?),
                )
            };
            let report = BoundsOutput {
                epsilon,
                delta,
                required_k: required,
                k,
                p_single: p_single(delta)?,
                lemma1_bound: lemma1_bound(delta, k)?,
                p_multi: multi,
                p_single_of_sum: single_of_sum,
            };
            match format {
                Some(OutputFormat::Json) => print_json(&report)?,
                Some(OutputFormat::Csv) => {
                    let mut w = csv::Writer::from_writer(std::io::stdout());
                    w.serialize(&report).map_err(|e| Error::Io(e.to_string()))?;
                    w.flush()?;
                }
                None => {
                    println!("required_k      {}", report.required_k);
                    println!("p_single(delta) {}", report.p_single);
                    println!("lemma1_bound    {} (k = {})", report.lemma1_bound, report.k);
                    if let (Some(m), Some(s)) = (report.p_multi, report.p_single_of_sum) {
                        println!("p_multi         {m}");
                        println!("p_single(sum)   {s}");
                    }
                }
            }
            Ok(0)
        }
        Command::VerifyLemma2 {
            grid,
            t_max,
            format,
        } => {
            let report = verify_lemma2(grid, t_max)?;
            if format == Some(OutputFormat::Json) {
                print_json(&report)?;
            } else {
                println!(
                    "{} compositions checked, {} violations, min margin {:.3e}",
                    report.compositions_checked, report.violations, report.min_margin
                );
                println!(
                    "two-step gap 4Δ₁Δ₂(Δ − Δ₁Δ₂): max error {:.3e} over {} pairs",
                    report.identity_max_error, report.identity_pairs_checked
                );
                println!(
                    "two-step gap 4Δ₁Δ₂(Δ + Δ₁Δ₂): max error {:.3e} ({})",
                    report.plus_variant_max_error,
                    if report.plus_variant_holds {
                        "holds"
                    } else {
                        "does not hold"
                    }
                );
                println!("{}", if report.passed { "PASS" } else { "FAIL" });
            }
            Ok(if report.passed { 0 } else { EXIT_CHECK_FAILED })
        }
        Command::OracleCheck {
            pairs,
            seed,
            max_m,
            tolerance,
            format,
        } => {
            if !max_m.is_power_of_two() || !(2..=MAX_ORACLE_M).contains(&max_m) {
                return Err(Error::config(
                    "--max-m",
                    format!("must be a power of two in 2..={MAX_ORACLE_M}"),
                ));
            }
            let sizes: Vec<usize> = (1..=max_m.trailing_zeros()).map(|r| 1 << r).collect();
            let reports = oracle_check(&sizes, pairs, seed)?;
            let passed = reports.iter().all(|r| r.max_abs_error <= tolerance);
            if format == Some(OutputFormat::Json) {
                print_json(&reports)?;
            } else {
                for r in &reports {
                    println!(
                        "m = {:>2}: {} pairs, max |Δp| = {:.3e}",
                        r.m, r.pairs, r.max_abs_error
                    );
                }
                println!("{}", if passed { "PASS" } else { "FAIL" });
            }
            Ok(if passed { 0 } else { EXIT_CHECK_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
