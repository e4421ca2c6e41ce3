//! Run configuration: strict TOML files, command-line overrides and the
//! canonical echo written next to every report.

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bifidelity::BoundConstants;
use crate::error::{Error, Result};
use crate::experiments::TestPreset;
use crate::fields::ParamVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    RunTest,
    Sweep,
    SolveHf,
    SolveLf,
    Reference,
    Selftest,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::RunTest => "run-test",
            Command::Sweep => "sweep",
            Command::SolveHf => "solve-hf",
            Command::SolveLf => "solve-lf",
            Command::Reference => "reference",
            Command::Selftest => "selftest",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "run-test" => Command::RunTest,
            "sweep" => Command::Sweep,
            "solve-hf" => Command::SolveHf,
            "solve-lf" => Command::SolveLf,
            "reference" => Command::Reference,
            "selftest" => Command::Selftest,
            _ => return Err(Error::Config(format!("unknown command `{s}`"))),
        })
    }
}

/// Fully resolved and validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub preset: TestPreset,
    /// Sizes evaluated by `sweep`; `run-test` uses `1..=n`.
    pub n_list: Vec<usize>,
    /// Parameter point for `solve-hf` and `solve-lf`.
    pub z: Option<ParamVector>,
    pub out: PathBuf,
    /// Worker threads; never part of the echo since it cannot change results.
    pub workers: Option<usize>,
}

/// Top-level keys of a config file. Integers are read signed so range
/// violations get a message naming the key instead of a type error.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Option<String>,
    preset: Option<i64>,
    epsilon: Option<f64>,
    n: Option<i64>,
    n_list: Option<Vec<i64>>,
    candidates: Option<i64>,
    validation: Option<i64>,
    seed: Option<i64>,
    validation_seed: Option<i64>,
    lf_sigma_scale: Option<f64>,
    sparse_level: Option<i64>,
    z: Option<Vec<f64>>,
    out: Option<String>,
    workers: Option<i64>,
    bound: Option<BoundConstants>,
    custom: Option<TestPreset>,
}

/// Values given on the command line; each one beats the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub command: Option<Command>,
    pub preset: Option<i64>,
    pub epsilon: Option<f64>,
    pub n: Option<i64>,
    pub n_list: Option<Vec<i64>>,
    pub candidates: Option<i64>,
    pub seed: Option<i64>,
    pub lf_sigma_scale: Option<f64>,
    pub z: Option<Vec<f64>>,
    pub out: Option<String>,
    pub workers: Option<i64>,
}

/// 1-based line of the first `key = ...` assignment in `src`.
fn line_of(src: &str, key: &str) -> Option<usize> {
    src.lines()
        .position(|l| {
            let t = l.trim_start();
            t.strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}

struct Ctx<'a> {
    src: &'a str,
}

impl Ctx<'_> {
    fn err(&self, key: &str, msg: impl std::fmt::Display) -> Error {
        match line_of(self.src, key) {
            Some(line) => Error::Config(format!("`{key}` (line {line}): {msg}")),
            None => Error::Config(format!("`{key}`: {msg}")),
        }
    }

    fn int(&self, key: &str, v: i64, min: i64, max: i64) -> Result<i64> {
        if v < min || v > max {
            return Err(self.err(key, format!("{v} outside {min}..={max}")));
        }
        Ok(v)
    }

    fn positive(&self, key: &str, v: f64) -> Result<f64> {
        if !(v > 0.0 && v.is_finite()) {
            return Err(self.err(key, format!("{v} must be positive and finite")));
        }
        Ok(v)
    }
}

const MAX_SAMPLES: i64 = 1_000_000;

/// Parses a config file body and applies `overrides`.
pub fn parse_config(src: &str, overrides: &Overrides) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
    resolve(raw, src, overrides)
}

/// Builds a config from overrides alone.
pub fn from_overrides(overrides: &Overrides) -> Result<RunConfig> {
    resolve(RawConfig::default(), "", overrides)
}

fn resolve(raw: RawConfig, src: &str, o: &Overrides) -> Result<RunConfig> {
    let cx = Ctx { src };
    let command = match (o.command, raw.command) {
        (Some(c), _) => c,
        (None, Some(s)) => s.parse().map_err(|e: Error| cx.err("command", e))?,
        (None, None) => Command::RunTest,
    };

    let preset_id = o.preset.or(raw.preset);
    let mut preset = match (preset_id, raw.custom) {
        (Some(_), Some(_)) if o.preset.is_none() => {
            return Err(cx.err("preset", "give either `preset` or a [custom] table"))
        }
        (Some(id), _) => TestPreset::by_id(cx.int("preset", id, 1, 5)? as u8)?,
        (None, Some(c)) => c,
        (None, None) => TestPreset::by_id(1)?,
    };

    if let Some(eps) = o.epsilon.or(raw.epsilon) {
        preset = preset.with_epsilon(cx.positive("epsilon", eps)?);
    }
    if let Some(s) = o.lf_sigma_scale.or(raw.lf_sigma_scale) {
        preset.lf_sigma_scale = cx.positive("lf_sigma_scale", s)?;
    }
    if let Some(c) = o.candidates.or(raw.candidates) {
        preset.candidates = cx.int("candidates", c, 1, MAX_SAMPLES)? as usize;
    }
    if let Some(v) = raw.validation {
        preset.validation = cx.int("validation", v, 1, MAX_SAMPLES)? as usize;
    }
    if let Some(s) = o.seed.or(raw.seed) {
        preset.candidate_seed = cx.int("seed", s, 0, i64::MAX)? as u64;
    }
    if let Some(s) = raw.validation_seed {
        preset.validation_seed = cx.int("validation_seed", s, 0, i64::MAX)? as u64;
    }
    if let Some(l) = raw.sparse_level {
        preset.sparse_level = cx.int("sparse_level", l, 0, 8)? as u32;
    }
    if let Some(b) = raw.bound {
        if !(b.c1 >= 0.0 && b.c2 >= 0.0 && b.c1.is_finite() && b.c2.is_finite()) {
            return Err(cx.err("c1", "bound constants must be finite and >= 0"));
        }
        preset.bound = b;
    }
    if let Some(n) = o.n.or(raw.n) {
        preset.n = cx.int("n", n, 0, MAX_SAMPLES)? as usize;
    }

    let n_list = match o.n_list.clone().or(raw.n_list) {
        Some(list) => {
            if list.is_empty() {
                return Err(cx.err("n_list", "must not be empty"));
            }
            list.iter()
                .map(|&n| cx.int("n_list", n, 0, MAX_SAMPLES).map(|n| n as usize))
                .collect::<Result<Vec<_>>>()?
        }
        None => (1..=preset.n).collect(),
    };

    let z = match o.z.clone().or(raw.z) {
        Some(z) => {
            let z = ParamVector::new(z).map_err(|e| cx.err("z", e))?;
            if z.dim() != preset.dimension {
                return Err(cx.err(
                    "z",
                    format!(
                        "{} entries, preset dimension is {}",
                        z.dim(),
                        preset.dimension
                    ),
                ));
            }
            Some(z)
        }
        None => None,
    };

    let workers = match o.workers.or(raw.workers) {
        Some(w) => Some(cx.int("workers", w, 1, 4096)? as usize),
        None => None,
    };
    let out = PathBuf::from(o.out.clone().or(raw.out).unwrap_or_else(|| "report".into()));

    preset
        .validate()
        .map_err(|e| Error::Config(e.to_string()))?;
    let cap = n_list.iter().copied().max().unwrap_or(0).max(preset.n);
    if cap > preset.candidates {
        return Err(cx.err(
            "n",
            format!("{cap} exceeds the {} candidates", preset.candidates),
        ));
    }

    Ok(RunConfig {
        command,
        preset,
        n_list,
        z,
        out,
        workers,
    })
}

#[derive(Serialize)]
struct Echo<'a> {
    command: &'a str,
    out: String,
    n_list: &'a [usize],
    #[serde(skip_serializing_if = "Option::is_none")]
    z: Option<&'a [f64]>,
    custom: &'a TestPreset,
}

impl RunConfig {
    /// Canonical TOML form. Parsing it back yields the same config, minus
    /// the worker count.
    pub fn canonical(&self) -> String {
        let echo = Echo {
            command: self.command.as_str(),
            out: self.out.to_string_lossy().into_owned(),
            n_list: &self.n_list,
            z: self.z.as_ref().map(|z| z.as_slice()),
            custom: &self.preset,
        };
        toml::to_string(&echo).expect("run config serializes")
    }
}
