//! Flat key-value scenario files.
//!
//! Grammar, one entry per line (UTF-8):
//!
//! ```text
//! line    := blank | comment | entry
//! comment := '#' any*
//! entry   := key '=' value [comment]
//! key     := segment ('.' segment)*      segment := [A-Za-z0-9_]+
//! value   := any text up to '#', trimmed; may be wrapped in double quotes to keep '#'
//! ```
//!
//! Duplicate keys are rejected. Recognized top-level keys: `generator` or `input`,
//! `output`, `seed`, `modes`, `potential`, `tolerance.<operation>`, and
//! `step.<index>.op` with `step.<index>.<parameter>` for each step, run in index order.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub origin: String,
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.line > 0 {
            write!(f, "{}:{}: {}", self.origin, self.line, self.message)
        } else {
            write!(f, "{}: {}", self.origin, self.message)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub value: String,
    pub line: usize,
}

pub fn parse(text: &str, origin: &str) -> Result<BTreeMap<String, Entry>, ConfigError> {
    let err = |line, message: String| ConfigError { origin: origin.to_string(), line, message };
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, rest)) = trimmed.split_once('=') else {
            return Err(err(line, format!("expected `key = value`, found `{trimmed}`")));
        };
        let key = key.trim();
        if key.is_empty() || !key.split('.').all(|s| !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')) {
            return Err(err(line, format!("invalid key `{key}`")));
        }
        let rest = rest.trim();
        let value = if let Some(q) = rest.strip_prefix('"') {
            let Some(end) = q.find('"') else {
                return Err(err(line, "unterminated quoted value".into()));
            };
            let tail = q[end + 1..].trim();
            if !(tail.is_empty() || tail.starts_with('#')) {
                return Err(err(line, format!("unexpected text after quoted value: `{tail}`")));
            }
            q[..end].to_string()
        } else {
            rest.split('#').next().unwrap().trim().to_string()
        };
        if value.is_empty() {
            return Err(err(line, format!("empty value for `{key}`")));
        }
        if let Some(prev) = out.insert(key.to_string(), Entry { value, line }) {
            return Err(err(line, format!("duplicate key `{key}` (first set on line {})", prev.line)));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Generator(String),
    Input(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub index: u64,
    pub op: String,
    pub line: usize,
    pub params: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub source: Source,
    pub output: String,
    pub seed: u64,
    pub modes: Option<usize>,
    pub potential: Option<String>,
    pub tolerances: BTreeMap<String, f64>,
    pub steps: Vec<Step>,
}

pub fn scenario(text: &str, origin: &str) -> Result<Scenario, ConfigError> {
    let entries = parse(text, origin)?;
    let err = |line, message: String| ConfigError { origin: origin.to_string(), line, message };
    let mut source = None;
    let mut output = "katolab-out".to_string();
    let mut seed = 0;
    let mut modes = None;
    let mut potential = None;
    let mut tolerances = BTreeMap::new();
    let mut steps: BTreeMap<u64, (Option<(String, usize)>, BTreeMap<String, String>, usize)> = BTreeMap::new();
    for (key, e) in &entries {
        let parts: Vec<&str> = key.split('.').collect();
        match parts.as_slice() {
            ["generator"] | ["input"] => {
                if source.is_some() {
                    return Err(err(e.line, "set exactly one of `generator` and `input`".into()));
                }
                source = Some(if parts[0] == "generator" { Source::Generator(e.value.clone()) } else { Source::Input(e.value.clone()) });
            }
            ["output"] => output = e.value.clone(),
            ["seed"] => seed = e.value.parse().map_err(|_| err(e.line, format!("`seed` must be an unsigned integer, got `{}`", e.value)))?,
            ["modes"] => modes = Some(e.value.parse().map_err(|_| err(e.line, format!("`modes` must be an unsigned integer, got `{}`", e.value)))?),
            ["potential"] => potential = Some(e.value.clone()),
            ["tolerance", name] => {
                let v: f64 = e.value.parse().map_err(|_| err(e.line, format!("tolerance must be a number, got `{}`", e.value)))?;
                tolerances.insert(name.to_string(), v);
            }
            ["step", idx, rest @ ..] if !rest.is_empty() => {
                let index: u64 = idx.parse().map_err(|_| err(e.line, format!("step index must be an unsigned integer, got `{idx}`")))?;
                let slot = steps.entry(index).or_insert((None, BTreeMap::new(), e.line));
                slot.2 = slot.2.min(e.line);
                if rest == ["op"] {
                    slot.0 = Some((e.value.clone(), e.line));
                } else {
                    slot.1.insert(rest.join("."), e.value.clone());
                }
            }
            _ => return Err(err(e.line, format!("unknown key `{key}`"))),
        }
    }
    let source = source.ok_or_else(|| err(0, "missing `generator` or `input`".into()))?;
    let steps = steps
        .into_iter()
        .map(|(index, (op, params, first))| match op {
            Some((op, line)) => Ok(Step { index, op, line, params }),
            None => Err(err(first, format!("step {index} has parameters but no `op`"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Scenario { source, output, seed, modes, potential, tolerances, steps })
}
