//! Experiment configuration, read from TOML.
//!
//! ```toml
//! n = 4
//! epsilon = 0.01
//! k = "auto"          # or an explicit copy count
//! trials = 100000
//! seed = 42
//!
//! [attack]
//! kind = "incremental"
//! deltas = [0.25, 0.25]
//!
//! [script]
//! kind = "default"    # store, then (attack step, retrieve) per attack step
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::adversary::AttackSchedule;
use crate::checker::required_k;
use crate::code::{HadamardCode, LocallyDecodableCode, Message};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Message length.
    pub n: usize,
    /// Target error rate; also picks `k` when `k = "auto"`.
    pub epsilon: f64,
    #[serde(default)]
    pub k: Copies,
    pub trials: u64,
    pub seed: u64,
    /// Message stored by the first store of every session; random per session when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<Message>,
    /// Keep every session's verdict stream in the result.
    #[serde(default)]
    pub record_verdicts: bool,
    /// Reject flip schedules that never accumulate `δ·m` flips.
    #[serde(default)]
    pub require_codeword_reach: bool,
    #[serde(default)]
    pub code: CodeConfig,
    #[serde(default)]
    pub attack: AttackSchedule,
    #[serde(default)]
    pub script: Script,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Number of fingerprint copies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Copies {
    #[default]
    Auto,
    Fixed(usize),
}

impl Serialize for Copies {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Copies::Auto => s.serialize_str("auto"),
            Copies::Fixed(k) => s.serialize_u64(*k as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Copies {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct CopiesVisitor;

        impl Visitor<'_> for CopiesVisitor {
            type Value = Copies;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("\"auto\" or a positive integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Copies, E> {
                if v == "auto" {
                    Ok(Copies::Auto)
                } else {
                    v.parse().map(Copies::Fixed).map_err(E::custom)
                }
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Copies, E> {
                Ok(Copies::Fixed(v as usize))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Copies, E> {
                usize::try_from(v)
                    .map(Copies::Fixed)
                    .map_err(|_| E::custom("k must be non-negative"))
            }
        }

        d.deserialize_any(CopiesVisitor)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeKind {
    #[default]
    Hadamard,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    #[serde(default)]
    pub kind: CodeKind,
    #[serde(default = "default_delta_dec")]
    pub delta_dec: f64,
}

fn default_delta_dec() -> f64 {
    HadamardCode::DEFAULT_DELTA_DEC
}

impl Default for CodeConfig {
    fn default() -> Self {
        CodeConfig {
            kind: CodeKind::Hadamard,
            delta_dec: default_delta_dec(),
        }
    }
}

/// One user or adversary action in a session.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Op {
    /// Store the given message, or a fresh random one.
    Store(Option<Message>),
    /// Retrieve the given bit (0-based), or a uniformly random one.
    Retrieve(Option<usize>),
    /// Run the adversary's next step.
    Attack,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Store(None) => f.write_str("store"),
            Op::Store(Some(m)) => write!(f, "store:{m}"),
            Op::Retrieve(None) => f.write_str("retrieve"),
            Op::Retrieve(Some(j)) => write!(f, "retrieve:{j}"),
            Op::Attack => f.write_str("attack"),
        }
    }
}

impl FromStr for Op {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let bad = |msg: &str| Error::config("script.ops", format!("{s:?}: {msg}"));
        match (head, arg) {
            ("store", None) => Ok(Op::Store(None)),
            ("store", Some(m)) => Ok(Op::Store(Some(m.parse()?))),
            ("retrieve", None) => Ok(Op::Retrieve(None)),
            ("retrieve", Some(j)) => j
                .parse()
                .map(|j| Op::Retrieve(Some(j)))
                .map_err(|_| bad("index must be a non-negative integer")),
            ("attack", None) => Ok(Op::Attack),
            _ => Err(bad("expected store[:bits], retrieve[:index] or attack")),
        }
    }
}

impl Serialize for Op {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Op {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// The sequence of operations run in every session.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Script {
    /// One store, then an attack step followed by a retrieve, once per attack step.
    #[default]
    Default,
    /// One store, then `operations` random stores/retrieves; attack steps run
    /// before the first operations, one each, until the schedule is exhausted.
    Mixed {
        operations: usize,
        #[serde(default = "default_store_fraction")]
        store_fraction: f64,
    },
    Explicit {
        ops: Vec<Op>,
    },
}

fn default_store_fraction() -> f64 {
    0.25
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::config(
                "output.format",
                format!("unknown format {other:?}"),
            )),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Both formats are written when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(s).map_err(|e| {
            let path = e
                .span()
                .map(|span| format!("bytes {}..{}", span.start, span.end))
                .unwrap_or_else(|| "<document>".to_string());
            Error::config(path, e.message().to_string())
        })?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<document>", e.to_string()))
    }

    pub fn build_code(&self) -> Result<HadamardCode> {
        match self.code.kind {
            CodeKind::Hadamard => HadamardCode::with_radius(self.n, self.code.delta_dec),
        }
    }

    /// The copy count after resolving `auto`.
    pub fn resolved_k(&self) -> Result<usize> {
        match self.k {
            Copies::Fixed(k) => Ok(k),
            Copies::Auto => {
                let delta = self.build_code()?.params().delta;
                required_k(self.epsilon, delta).map_err(|e| Error::config("k", e.to_string()))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n", "must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::config("epsilon", "must lie in (0, 1/2)"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.k == Copies::Fixed(0) {
            return Err(Error::config("k", "must be at least 1"));
        }
        let params = self.build_code()?.params();
        params.validate()?;
        self.resolved_k()?;
        if let Some(m) = &self.message {
            if m.len() != self.n {
                return Err(Error::config(
                    "message",
                    format!("has {} bits, n = {}", m.len(), self.n),
                ));
            }
        }
        self.attack.validate(&params, self.require_codeword_reach)?;

        match &self.script {
            Script::Default => {}
            Script::Mixed {
                operations,
                store_fraction,
            } => {
                if *operations == 0 {
                    return Err(Error::config("script.operations", "must be at least 1"));
                }
                if !(0.0..=1.0).contains(store_fraction) {
                    return Err(Error::config("script.store_fraction", "must lie in [0, 1]"));
                }
            }
            Script::Explicit { ops } => {
                if !matches!(ops.first(), Some(Op::Store(_))) {
                    return Err(Error::config(
                        "script.ops[0]",
                        "sessions must begin with a store",
                    ));
                }
                let mut attacks = 0;
                for (i, op) in ops.iter().enumerate() {
                    match op {
                        Op::Store(Some(m)) if m.len() != self.n => {
                            return Err(Error::config(
                                format!("script.ops[{i}]"),
                                format!("message has {} bits, n = {}", m.len(), self.n),
                            ));
                        }
                        Op::Retrieve(Some(j)) if *j >= self.n => {
                            return Err(Error::config(
                                format!("script.ops[{i}]"),
                                format!("index {j} out of range for n = {}", self.n),
                            ));
                        }
                        Op::Attack => {
                            attacks += 1;
                            if attacks > self.attack.steps() {
                                return Err(Error::config(
                                    format!("script.ops[{i}]"),
                                    format!(
                                        "attack schedule has only {} steps",
                                        self.attack.steps()
                                    ),
                                ));
                            }
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }
}
