//! Flat `key = value` scenario files.
//!
//! ```text
//! # scenario 1
//! n = 15
//! r = 10
//! k = 50
//! deg_f = 2
//! deadline = 1
//! mu_g = 10
//! mu_b = 3
//! p_gg = 0.8
//! p_bb = 0.8
//! worker.3.p_gg = 0.9
//! ```
//!
//! Blank lines and `#` comments are ignored. `p_gg` and `p_bb` apply to every
//! worker unless overridden by `worker.<i>.p_gg` / `worker.<i>.p_bb` (1-based).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use lea_core::sim::DEFAULT_CHUNK_LEN;
use lea_core::{
    Error, Fidelity, ScenarioConfig, StrategyKind, TrajectoryMode, WorkerParams, DEFAULT_MODULUS,
};

const REQUIRED: [&str; 9] = [
    "n", "r", "k", "deg_f", "deadline", "mu_g", "mu_b", "p_gg", "p_bb",
];
const OPTIONAL: [&str; 8] = [
    "strategy",
    "static_good_prob",
    "rounds",
    "seed",
    "fidelity",
    "trajectory",
    "modulus",
    "chunk_len",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// Offending key, when one can be named.
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at_key(key: &str, message: impl Into<String>) -> Self {
        Self {
            key: Some(key.to_string()),
            line: None,
            message: message.into(),
        }
    }

    fn at_line(line: usize, key: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            key: key.map(str::to_string),
            line: Some(line),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "{key}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

struct Entry {
    value: String,
    line: usize,
}

#[derive(Default, Clone, Copy)]
struct Override {
    p_gg: Option<f64>,
    p_bb: Option<f64>,
}

fn parse_value<T: FromStr>(key: &str, entry: &Entry, what: &str) -> Result<T, ConfigError> {
    entry.value.parse().map_err(|_| {
        ConfigError::at_line(
            entry.line,
            Some(key),
            format!("expected {what}, got {:?}", entry.value),
        )
    })
}

/// Integers may also be written in exponent form, e.g. `1e5`.
fn parse_count(key: &str, entry: &Entry) -> Result<u64, ConfigError> {
    if let Ok(v) = entry.value.parse::<u64>() {
        return Ok(v);
    }
    match entry.value.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64 => Ok(x as u64),
        _ => Err(ConfigError::at_line(
            entry.line,
            Some(key),
            format!("expected a non-negative integer, got {:?}", entry.value),
        )),
    }
}

fn parse_size(key: &str, entry: &Entry) -> Result<usize, ConfigError> {
    usize::try_from(parse_count(key, entry)?)
        .map_err(|_| ConfigError::at_line(entry.line, Some(key), "value too large"))
}

fn parse_prob(key: &str, entry: &Entry) -> Result<f64, ConfigError> {
    let p: f64 = parse_value(key, entry, "a number")?;
    if !(0.0..=1.0).contains(&p) {
        return Err(ConfigError::at_line(
            entry.line,
            Some(key),
            format!("{p} is not a probability"),
        ));
    }
    Ok(p)
}

fn parse_enum<T: FromStr<Err = Error>>(key: &str, entry: &Entry) -> Result<T, ConfigError> {
    entry
        .value
        .parse()
        .map_err(|e: Error| ConfigError::at_line(entry.line, Some(key), e.to_string()))
}

/// Splits `worker.<i>.<field>` into `(i, field)`.
fn worker_key(key: &str) -> Option<(&str, &str)> {
    let rest = key.strip_prefix("worker.")?;
    rest.split_once('.')
}

/// Parses and validates a scenario.
pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::at_line(
                line,
                None,
                format!("expected `key = value`, got {content:?}"),
            ));
        };
        let (key, value) = (key.trim(), value.trim());
        let known = REQUIRED.contains(&key)
            || OPTIONAL.contains(&key)
            || worker_key(key).is_some_and(|(_, field)| field == "p_gg" || field == "p_bb");
        if !known {
            return Err(ConfigError::at_line(line, Some(key), "unknown key"));
        }
        if value.is_empty() {
            return Err(ConfigError::at_line(line, Some(key), "missing value"));
        }
        let entry = Entry {
            value: value.to_string(),
            line,
        };
        if let Some(prev) = entries.insert(key.to_string(), entry) {
            return Err(ConfigError::at_line(
                line,
                Some(key),
                format!("duplicate key (first set on line {})", prev.line),
            ));
        }
    }
    let get = |key: &str| {
        entries
            .get(key)
            .ok_or_else(|| ConfigError::at_key(key, "missing required key"))
    };
    for key in REQUIRED {
        get(key)?;
    }

    let n = parse_size("n", get("n")?)?;
    let r = parse_size("r", get("r")?)?;
    let k = parse_size("k", get("k")?)?;
    let deg_f = parse_size("deg_f", get("deg_f")?)?;
    for (key, v) in [("n", n), ("r", r), ("k", k), ("deg_f", deg_f)] {
        if v == 0 {
            return Err(ConfigError::at_line(
                entries[key].line,
                Some(key),
                "must be >= 1",
            ));
        }
    }
    let deadline: f64 = parse_value("deadline", get("deadline")?, "a number")?;
    if !(deadline > 0.0 && deadline.is_finite()) {
        return Err(ConfigError::at_key(
            "deadline",
            format!("must be positive, got {deadline}"),
        ));
    }
    let mu_g: f64 = parse_value("mu_g", get("mu_g")?, "a number")?;
    let mu_b: f64 = parse_value("mu_b", get("mu_b")?, "a number")?;
    if !(mu_b > 0.0 && mu_b.is_finite()) {
        return Err(ConfigError::at_key(
            "mu_b",
            format!("must be positive, got {mu_b}"),
        ));
    }
    if !(mu_g > mu_b && mu_g.is_finite()) {
        return Err(ConfigError::at_key(
            "mu_g",
            format!("must exceed mu_b = {mu_b}, got {mu_g}"),
        ));
    }
    let p_gg = parse_prob("p_gg", get("p_gg")?)?;
    let p_bb = parse_prob("p_bb", get("p_bb")?)?;

    let mut overrides = vec![Override::default(); n];
    for (key, entry) in &entries {
        let Some((index, field)) = worker_key(key) else {
            continue;
        };
        let i: usize = index
            .parse()
            .ok()
            .filter(|i| (1..=n).contains(i))
            .ok_or_else(|| {
                ConfigError::at_line(
                    entry.line,
                    Some(key),
                    format!("worker index must be in 1..={n}"),
                )
            })?;
        let p = parse_prob(key, entry)?;
        match field {
            "p_gg" => overrides[i - 1].p_gg = Some(p),
            _ => overrides[i - 1].p_bb = Some(p),
        }
    }
    let mut workers = Vec::with_capacity(n);
    for (i, o) in overrides.iter().enumerate() {
        let w = WorkerParams::new(o.p_gg.unwrap_or(p_gg), o.p_bb.unwrap_or(p_bb), mu_g, mu_b)
            .map_err(|e| ConfigError::at_key(&format!("worker.{}", i + 1), e.to_string()))?;
        workers.push(w);
    }

    let mut cfg = ScenarioConfig::homogeneous(n, r, k, deg_f, deadline, mu_g, mu_b, p_gg, p_bb)
        .map_err(|e| ConfigError::at_key("p_gg", e.to_string()))?;
    cfg.workers = workers;
    if let Some(e) = entries.get("strategy") {
        cfg.strategy = parse_enum::<StrategyKind>("strategy", e)?;
    }
    if let Some(e) = entries.get("static_good_prob") {
        cfg.static_good_prob = Some(parse_prob("static_good_prob", e)?);
    }
    if let Some(e) = entries.get("rounds") {
        cfg.rounds = parse_count("rounds", e)?;
    }
    if let Some(e) = entries.get("seed") {
        cfg.seed = parse_count("seed", e)?;
    }
    if let Some(e) = entries.get("fidelity") {
        cfg.fidelity = parse_enum::<Fidelity>("fidelity", e)?;
    }
    if let Some(e) = entries.get("trajectory") {
        cfg.trajectory = parse_enum::<TrajectoryMode>("trajectory", e)?;
    }
    if let Some(e) = entries.get("modulus") {
        cfg.modulus = parse_count("modulus", e)?;
    }
    if let Some(e) = entries.get("chunk_len") {
        cfg.chunk_len = parse_size("chunk_len", e)?;
    }
    check_scenario(&cfg)?;
    Ok(cfg)
}

/// Validates a scenario, naming the key most responsible for a failure.
pub fn check_scenario(cfg: &ScenarioConfig) -> Result<(), ConfigError> {
    cfg.validate().map_err(|e| {
        let key = match &e {
            Error::DeadlineInfeasible { .. } => "deadline",
            Error::BadModulus(_) | Error::FieldTooSmall { .. } => "modulus",
            Error::InvalidScheme(_) => "k",
            Error::InvalidWorker(_) => "mu_g",
            Error::InvalidScenario(msg) if msg.contains("rounds") => "rounds",
            Error::InvalidScenario(msg) if msg.contains("chunk_len") => "chunk_len",
            Error::InvalidScenario(msg) if msg.contains("worker") => "p_gg",
            Error::InvalidScenario(msg) if msg.contains("within the deadline") => "deadline",
            _ => "config",
        };
        ConfigError::at_key(key, e.to_string())
    })
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ConfigError::at_key("config", format!("cannot read {}: {e}", path.display()))
    })?;
    parse_config_str(&text)
}

/// Canonical text for a scenario: every key spelled out, per-worker lines
/// only where a worker differs from worker 1.
pub fn write_config(cfg: &ScenarioConfig) -> String {
    let base = cfg.workers.first().copied();
    let (p_gg, p_bb) = base.map(|w| (w.p_gg, w.p_bb)).unwrap_or((0.5, 0.5));
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    line("n", cfg.n.to_string());
    line("r", cfg.r.to_string());
    line("k", cfg.k.to_string());
    line("deg_f", cfg.deg_f.to_string());
    line("deadline", cfg.deadline.to_string());
    line("mu_g", cfg.mu_g.to_string());
    line("mu_b", cfg.mu_b.to_string());
    line("p_gg", p_gg.to_string());
    line("p_bb", p_bb.to_string());
    line("strategy", cfg.strategy.to_string());
    if let Some(p) = cfg.static_good_prob {
        line("static_good_prob", p.to_string());
    }
    line("rounds", cfg.rounds.to_string());
    line("seed", cfg.seed.to_string());
    line("fidelity", cfg.fidelity.to_string());
    line("trajectory", cfg.trajectory.to_string());
    if cfg.modulus != DEFAULT_MODULUS {
        line("modulus", cfg.modulus.to_string());
    }
    if cfg.chunk_len != DEFAULT_CHUNK_LEN {
        line("chunk_len", cfg.chunk_len.to_string());
    }
    for (i, w) in cfg.workers.iter().enumerate() {
        if w.p_gg != p_gg {
            line(&format!("worker.{}.p_gg", i + 1), w.p_gg.to_string());
        }
        if w.p_bb != p_bb {
            line(&format!("worker.{}.p_bb", i + 1), w.p_bb.to_string());
        }
    }
    out
}
