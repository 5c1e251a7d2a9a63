//! Plain-text experiment configuration.
//!
//! The format is flat sections of `key = value` lines:
//!
//! ```text
//! # comment
//! [sequence]
//! q = 5 11 17 29
//! tail = quadratic          # none | quadratic | geometric
//!
//! [lattices]
//! gamma = 1111/allin
//! lambda = 0000/allout
//!
//! [levels]
//! k_max = 3
//! m_probes = 0
//!
//! [caps]
//! head_size = 1000000000
//! points = 5000
//!
//! [tasks]
//! run = classify covolume gamma
//!
//! [output]
//! report = report.json
//! traces = traces
//! ```
//!
//! A geometric tail additionally takes `c` and `r` as rationals.

use crate::CliError;
use latlab_core::lattice::{LatticeSpec, TailMode};
use latlab_core::rational::parse_rat;
use latlab_core::truncation::{PrimePowerSeq, TailRule};
use latlab_core::Error as CoreError;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// The tasks the runner knows, in their fixed execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Task {
    Classify,
    Covolume,
    Gamma,
    Commensurate,
    Serre,
    Spectrum,
    Folner,
    Ergodicity,
    Witnesses,
}

impl Task {
    pub const ALL: [Task; 9] = [
        Task::Classify,
        Task::Covolume,
        Task::Gamma,
        Task::Commensurate,
        Task::Serre,
        Task::Spectrum,
        Task::Folner,
        Task::Ergodicity,
        Task::Witnesses,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Classify => "classify",
            Task::Covolume => "covolume",
            Task::Gamma => "gamma",
            Task::Commensurate => "commensurate",
            Task::Serre => "serre",
            Task::Spectrum => "spectrum",
            Task::Folner => "folner",
            Task::Ergodicity => "ergodicity",
            Task::Witnesses => "witnesses",
        }
    }
}

impl FromStr for Task {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Task::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown task `{s}`"))
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A fully validated experiment description.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub raw: String,
    pub seq: PrimePowerSeq,
    pub tail_label: String,
    pub q_values: Vec<u64>,
    pub lattices: BTreeMap<String, LatticeSpec>,
    pub lattice_labels: BTreeMap<String, String>,
    pub k_max: i64,
    pub m_probes: Vec<i64>,
    pub head_cap: u128,
    pub point_cap: u128,
    pub tasks: Vec<Task>,
    pub report_name: String,
    pub traces_dir: Option<String>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::config(msg)
}

/// Maps a core error raised while realizing the configured objects:
/// structural mismatches are config errors, mathematical preconditions
/// and caps are validation failures.
fn realize_err(err: CoreError) -> CliError {
    match err {
        CoreError::MaskLength { .. }
        | CoreError::EmptySequence
        | CoreError::SequenceMismatch => CliError::config(err.to_string()),
        other => CliError::from_core(other),
    }
}

struct RawConfig {
    sections: BTreeMap<String, Vec<(String, String)>>,
}

fn parse_sections(text: &str) -> Result<RawConfig, CliError> {
    let mut sections: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| config_err(format!("line {}: unterminated section header", lineno + 1)))?
                .trim()
                .to_string();
            if name.is_empty() {
                return Err(config_err(format!("line {}: empty section name", lineno + 1)));
            }
            sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("line {}: expected `key = value`", lineno + 1)))?;
        let section = current
            .clone()
            .ok_or_else(|| config_err(format!("line {}: key outside any section", lineno + 1)))?;
        sections
            .get_mut(&section)
            .expect("section present")
            .push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(RawConfig { sections })
}

fn take_keys<'a>(
    raw: &'a RawConfig,
    section: &str,
    allowed: &[&str],
) -> Result<BTreeMap<&'a str, &'a str>, CliError> {
    let mut out = BTreeMap::new();
    if let Some(entries) = raw.sections.get(section) {
        for (k, v) in entries {
            if !allowed.contains(&k.as_str()) {
                return Err(config_err(format!(
                    "section [{section}]: unknown key `{k}`"
                )));
            }
            if out.insert(k.as_str(), v.as_str()).is_some() {
                return Err(config_err(format!(
                    "section [{section}]: duplicate key `{k}`"
                )));
            }
        }
    }
    Ok(out)
}

fn parse_u128(section: &str, key: &str, value: &str) -> Result<u128, CliError> {
    value
        .parse::<u128>()
        .map_err(|_| config_err(format!("[{section}] {key}: expected a positive integer")))
        .and_then(|v| {
            if v == 0 {
                Err(config_err(format!("[{section}] {key}: must be positive")))
            } else {
                Ok(v)
            }
        })
}

fn parse_mask(name: &str, value: &str, seq_len: usize) -> Result<(Vec<bool>, TailMode, String), CliError> {
    let (bits, tail) = value
        .split_once('/')
        .ok_or_else(|| config_err(format!("lattice `{name}`: expected `bits/tailmode`")))?;
    let marks: Vec<bool> = bits
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(config_err(format!(
                "lattice `{name}`: mask bit `{other}` is not 0 or 1"
            ))),
        })
        .collect::<Result<_, _>>()?;
    if marks.len() != seq_len {
        return Err(config_err(format!(
            "lattice `{name}`: mask has {} bits for {} coordinates",
            marks.len(),
            seq_len
        )));
    }
    let mode = match tail {
        "allin" => TailMode::AllIn,
        "allout" => TailMode::AllOut,
        other => {
            return Err(config_err(format!(
                "lattice `{name}`: unknown tail mode `{other}` (allin | allout)"
            )))
        }
    };
    Ok((marks, mode, value.to_string()))
}

/// Parses and validates a configuration text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let raw = parse_sections(text)?;
    for section in raw.sections.keys() {
        if !["sequence", "lattices", "levels", "caps", "tasks", "output"]
            .contains(&section.as_str())
        {
            return Err(config_err(format!("unknown section [{section}]")));
        }
    }

    // [sequence]
    let seq_keys = take_keys(&raw, "sequence", &["q", "tail", "c", "r"])?;
    let q_text = seq_keys
        .get("q")
        .ok_or_else(|| config_err("missing [sequence] q"))?;
    let q_values: Vec<u64> = q_text
        .split_whitespace()
        .map(|tok| {
            tok.parse::<u64>()
                .map_err(|_| config_err(format!("[sequence] q: `{tok}` is not an integer")))
        })
        .collect::<Result<_, _>>()?;
    if q_values.is_empty() {
        return Err(config_err("[sequence] q: at least one value required"));
    }
    let tail_name = seq_keys.get("tail").copied().unwrap_or("none");
    let tail_rule = match tail_name {
        "none" => {
            if seq_keys.contains_key("c") || seq_keys.contains_key("r") {
                return Err(config_err("[sequence] c/r only apply to tail = geometric"));
            }
            TailRule::None
        }
        "quadratic" => {
            if seq_keys.contains_key("c") || seq_keys.contains_key("r") {
                return Err(config_err("[sequence] c/r only apply to tail = geometric"));
            }
            TailRule::QuadraticFloor
        }
        "geometric" => {
            let c = seq_keys
                .get("c")
                .ok_or_else(|| config_err("[sequence] tail = geometric requires c"))?;
            let r = seq_keys
                .get("r")
                .ok_or_else(|| config_err("[sequence] tail = geometric requires r"))?;
            let c = parse_rat(c)
                .ok_or_else(|| config_err(format!("[sequence] c: `{c}` is not a rational")))?;
            let r = parse_rat(r)
                .ok_or_else(|| config_err(format!("[sequence] r: `{r}` is not a rational")))?;
            TailRule::GeometricFloor { c, r }
        }
        other => {
            return Err(config_err(format!(
                "[sequence] tail: unknown rule `{other}` (none | quadratic | geometric)"
            )))
        }
    };
    let tail_label = tail_rule.label();
    let seq = PrimePowerSeq::new(&q_values, tail_rule).map_err(realize_err)?;

    // [lattices]
    let lattice_entries = raw
        .sections
        .get("lattices")
        .cloned()
        .unwrap_or_default();
    if lattice_entries.is_empty() {
        return Err(config_err("section [lattices]: at least one lattice required"));
    }
    let mut lattices = BTreeMap::new();
    let mut lattice_labels = BTreeMap::new();
    for (name, value) in &lattice_entries {
        if name.is_empty()
            || !name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(config_err(format!(
                "lattice name `{name}` must be alphanumeric with _ or -"
            )));
        }
        let (marks, mode, label) = parse_mask(name, value, seq.len())?;
        let spec = LatticeSpec::new(&seq, &marks, mode).map_err(realize_err)?;
        if lattices.insert(name.clone(), spec).is_some() {
            return Err(config_err(format!("duplicate lattice `{name}`")));
        }
        lattice_labels.insert(name.clone(), label);
    }

    // [levels]
    let level_keys = take_keys(&raw, "levels", &["k_max", "m_probes"])?;
    let k_max: i64 = level_keys
        .get("k_max")
        .map(|v| {
            v.parse::<i64>()
                .map_err(|_| config_err("[levels] k_max: expected an integer"))
        })
        .transpose()?
        .unwrap_or(seq.horizon());
    if k_max < 0 || k_max > seq.horizon() {
        return Err(config_err(format!(
            "[levels] k_max = {k_max} outside the listed range 0..={}",
            seq.horizon()
        )));
    }
    let m_probes: Vec<i64> = match level_keys.get("m_probes") {
        Some(v) => v
            .split_whitespace()
            .map(|tok| {
                tok.parse::<i64>()
                    .map_err(|_| config_err(format!("[levels] m_probes: `{tok}` is not an integer")))
            })
            .collect::<Result<_, _>>()?,
        None => vec![-1],
    };
    for &m in &m_probes {
        if m < -1 || m >= k_max {
            return Err(config_err(format!(
                "[levels] m_probes: {m} outside -1..{k_max}"
            )));
        }
    }

    // [caps]
    let cap_keys = take_keys(&raw, "caps", &["head_size", "points"])?;
    let head_cap = cap_keys
        .get("head_size")
        .map(|v| parse_u128("caps", "head_size", v))
        .transpose()?
        .unwrap_or(latlab_core::truncation::DEFAULT_HEAD_CAP);
    let point_cap = cap_keys
        .get("points")
        .map(|v| parse_u128("caps", "points", v))
        .transpose()?
        .unwrap_or(latlab_core::spectral::DEFAULT_POINT_CAP);

    // [tasks]
    let task_keys = take_keys(&raw, "tasks", &["run"])?;
    let mut tasks: Vec<Task> = Vec::new();
    if let Some(list) = task_keys.get("run") {
        for tok in list.split_whitespace() {
            let task = Task::from_str(tok).map_err(config_err)?;
            if !tasks.contains(&task) {
                tasks.push(task);
            }
        }
    }
    // Execution order is fixed regardless of listing order.
    tasks.sort();

    // [output]
    let out_keys = take_keys(&raw, "output", &["report", "traces"])?;
    let report_name = out_keys
        .get("report")
        .copied()
        .unwrap_or("report.json")
        .to_string();
    let traces_dir = out_keys.get("traces").map(|s| s.to_string());
    for name in std::iter::once(&report_name).chain(traces_dir.iter()) {
        if name.is_empty() || name.contains("..") || name.starts_with('/') {
            return Err(config_err(format!(
                "[output] `{name}` must be a relative path without `..`"
            )));
        }
    }

    Ok(ExperimentConfig {
        raw: text.to_string(),
        seq,
        tail_label,
        q_values,
        lattices,
        lattice_labels,
        k_max,
        m_probes,
        head_cap,
        point_cap,
        tasks,
        report_name,
        traces_dir,
    })
}
