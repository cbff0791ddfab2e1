//! Run configuration: a TOML file with flat model keys plus `[solver]`, `[sweep]`,
//! `[run]` and `[output]` sections, overridden by `--set key=value`.
//!
//! Every resolved value remembers where it came from (`default`, `file`, `set` or
//! `command`), and the resolved configuration serializes back to TOML so a CSV
//! metadata block can be fed straight back in as `--config`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use qthermo_core::chain::{Figure2Panel, DEFAULT_CHAIN_RATE};
use toml::{Table, Value};

use crate::error::CliError;
use crate::table::metadata_block;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    Lambda,
    Vee,
    Chain,
    Dufour,
    Sweep,
    Figure2,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Self::Lambda,
        Self::Vee,
        Self::Chain,
        Self::Dufour,
        Self::Sweep,
        Self::Figure2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Lambda => "lambda",
            Self::Vee => "vee",
            Self::Chain => "chain",
            Self::Dufour => "dufour",
            Self::Sweep => "sweep",
            Self::Figure2 => "figure2",
        }
    }

    fn parse(s: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown experiment `{s}` (expected lambda, vee, chain, dufour, sweep or figure2)")))
    }

    fn three_level(self) -> bool {
        matches!(self, Self::Lambda | Self::Vee)
    }

    fn chain_like(self) -> bool {
        matches!(self, Self::Chain | Self::Sweep | Self::Figure2)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Default,
    File,
    Set,
    Command,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Default => "default",
            Source::File => "file",
            Source::Set => "set",
            Source::Command => "command",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Real,
    Integer,
    Bool,
    Text,
    RealList,
    PairList,
    TextList,
}

impl Kind {
    fn describe(self) -> &'static str {
        match self {
            Kind::Real => "a number",
            Kind::Integer => "a non-negative integer",
            Kind::Bool => "true or false",
            Kind::Text => "a string",
            Kind::RealList => "a list of numbers",
            Kind::PairList => "a list of [T_L, T_R] pairs",
            Kind::TextList => "a list of strings",
        }
    }
}

struct KeySpec {
    key: &'static str,
    kind: Kind,
}

const fn spec(key: &'static str, kind: Kind) -> KeySpec {
    KeySpec { key, kind }
}

/// Every key the configuration accepts, as dotted paths.
const KEYS: &[KeySpec] = &[
    spec("n1", Kind::Real),
    spec("n2", Kind::Real),
    spec("T1", Kind::Real),
    spec("T2", Kind::Real),
    spec("omega1", Kind::Real),
    spec("omega2", Kind::Real),
    spec("omega", Kind::Real),
    spec("gamma", Kind::Real),
    spec("d", Kind::Real),
    spec("N", Kind::Integer),
    spec("h", Kind::Real),
    spec("g", Kind::Real),
    spec("T_L", Kind::Real),
    spec("T_R", Kind::Real),
    spec("temperatures", Kind::RealList),
    spec("P1", Kind::Real),
    spec("P2", Kind::Real),
    spec("Pe", Kind::Real),
    spec("n", Kind::Real),
    spec("capacity", Kind::Real),
    spec("solver.epsilon", Kind::Real),
    spec("solver.dt", Kind::Real),
    spec("sweep.g", Kind::RealList),
    spec("sweep.temperatures", Kind::PairList),
    spec("sweep.panel", Kind::Text),
    spec("run.experiment", Kind::Text),
    spec("run.trajectory", Kind::Bool),
    spec("run.t_max", Kind::Real),
    spec("run.samples", Kind::Integer),
    spec("run.panels", Kind::TextList),
    spec("output.path", Kind::Text),
    spec("output.format", Kind::Text),
];

/// Sections written into output metadata that carry no input.
const INFORMATIONAL_SECTIONS: [&str; 2] = ["provenance", "result"];

enum Slot {
    Unused,
    Optional,
    Default(Value),
}

fn real(v: f64) -> Slot {
    Slot::Default(Value::Float(v))
}

fn slot(key: &str, exp: Experiment) -> Slot {
    use Experiment::*;
    let three = exp.three_level();
    let chain = exp.chain_like();
    match key {
        "n1" | "n2" if three => real(if key == "n1" { 2.0 } else { 1.0 }),
        "T1" | "T2" if three => Slot::Optional,
        "omega1" | "omega2" | "d" if three => real(1.0),
        "omega" if exp == Dufour => real(1.0),
        "gamma" if three || exp == Dufour => real(1.0),
        "gamma" if chain => real(DEFAULT_CHAIN_RATE),
        "N" if chain => Slot::Default(Value::Integer(10)),
        "h" if chain => real(1.0),
        "g" | "T_L" | "T_R" if exp == Chain => real(match key {
            "g" => 0.1,
            "T_L" => 0.8,
            _ => 0.4,
        }),
        "temperatures" if exp == Chain => Slot::Optional,
        "P1" if exp == Dufour => real(0.2),
        "P2" if exp == Dufour => real(0.3),
        "Pe" if exp == Dufour => real(0.5),
        "n" if exp == Dufour => real(1.0),
        "capacity" if exp == Dufour => real(10.0),
        "solver.epsilon" if exp != Dufour => real(qthermo_core::davies::DEFAULT_FREQUENCY_TOL),
        "solver.dt" if exp == Dufour => real(0.01),
        "solver.dt" if three => Slot::Optional,
        "sweep.g" if exp == Sweep => Slot::Default(Value::Array(
            qthermo_core::chain::DEFAULT_G_SWEEP
                .iter()
                .map(|g| Value::Float(*g))
                .collect(),
        )),
        "sweep.temperatures" if exp == Sweep => {
            Slot::Default(Value::Array(vec![Value::Array(vec![
                Value::Float(0.8),
                Value::Float(0.4),
            ])]))
        }
        "sweep.panel" if exp == Sweep => Slot::Optional,
        "run.experiment" => Slot::Optional,
        "run.trajectory" if three => Slot::Default(Value::Boolean(false)),
        "run.t_max" if three => real(10.0),
        "run.t_max" if exp == Dufour => real(50.0),
        "run.samples" if three => Slot::Default(Value::Integer(1001)),
        "run.panels" if exp == Figure2 => Slot::Default(Value::Array(
            Figure2Panel::ALL
                .iter()
                .map(|p| Value::String(p.name().into()))
                .collect(),
        )),
        "output.path" => Slot::Optional,
        "output.format" => Slot::Default(Value::String("csv".into())),
        _ => Slot::Unused,
    }
}

/// Valid key closest to `key` by edit distance.
fn nearest_key(key: &str) -> &'static str {
    KEYS.iter()
        .map(|s| s.key)
        .min_by_key(|k| strsim::levenshtein(&key.to_lowercase(), &k.to_lowercase()))
        .expect("key table is not empty")
}

fn lookup(key: &str) -> Result<&'static KeySpec, CliError> {
    KEYS.iter()
        .find(|s| s.key == key)
        .ok_or_else(|| CliError::UnknownKey {
            key: key.to_string(),
            nearest: nearest_key(key),
        })
}

fn flatten(table: &Table, out: &mut Vec<(String, Value)>) -> Result<(), CliError> {
    for (k, v) in table {
        match v {
            Value::Table(_) if INFORMATIONAL_SECTIONS.contains(&k.as_str()) => {}
            Value::Table(inner) => {
                let prefix = format!("{k}.");
                if !KEYS.iter().any(|s| s.key.starts_with(&prefix)) {
                    return Err(CliError::UnknownKey {
                        key: k.clone(),
                        nearest: nearest_key(k),
                    });
                }
                for (ik, iv) in inner {
                    out.push((format!("{prefix}{ik}"), iv.clone()));
                }
            }
            _ => out.push((k.clone(), v.clone())),
        }
    }
    Ok(())
}

fn check_kind(key: &str, kind: Kind, value: Value) -> Result<Value, CliError> {
    let bad = || CliError::Config(format!("`{key}` must be {}", kind.describe()));
    let as_real = |v: &Value| match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    };
    Ok(match kind {
        Kind::Real => Value::Float(as_real(&value).ok_or_else(bad)?),
        Kind::Integer => match value {
            Value::Integer(i) if i >= 0 => value,
            _ => return Err(bad()),
        },
        Kind::Bool => match value {
            Value::Boolean(_) => value,
            _ => return Err(bad()),
        },
        Kind::Text => match value {
            Value::String(_) => value,
            _ => return Err(bad()),
        },
        Kind::RealList => match &value {
            Value::Array(items) => Value::Array(
                items
                    .iter()
                    .map(|v| as_real(v).map(Value::Float).ok_or_else(bad))
                    .collect::<Result<_, _>>()?,
            ),
            _ => return Err(bad()),
        },
        Kind::PairList => match &value {
            Value::Array(items) => Value::Array(
                items
                    .iter()
                    .map(|pair| match pair {
                        Value::Array(p) if p.len() == 2 => Ok(Value::Array(
                            p.iter()
                                .map(|v| as_real(v).map(Value::Float).ok_or_else(bad))
                                .collect::<Result<_, _>>()?,
                        )),
                        _ => Err(bad()),
                    })
                    .collect::<Result<_, _>>()?,
            ),
            _ => return Err(bad()),
        },
        Kind::TextList => match &value {
            Value::Array(items) if items.iter().all(|v| v.is_str()) => value,
            _ => return Err(bad()),
        },
    })
}

/// Parses the right-hand side of `--set key=value` as a TOML value, falling back
/// to a bare string so `--set output.format=text` works unquoted.
fn parse_override(raw: &str) -> Result<(String, Value), CliError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{raw}`")))?;
    let key = key.trim().to_string();
    let value = value.trim();
    let parsed = format!("v = {value}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(value.to_string()));
    Ok((key, parsed))
}

/// Reads a config file. A file whose lines all start with `#` or that carries
/// a CSV body after a `#` block is read as output metadata.
pub fn read_config_text(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let toml_text = if text.trim_start().starts_with('#') && !text.trim_start().starts_with("#!") {
        let block = metadata_block(&text);
        if block.trim().is_empty() {
            text
        } else {
            block
        }
    } else {
        text
    };
    toml_text
        .parse::<Table>()
        .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: Value,
    pub source: Source,
}

/// Fully resolved configuration for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    values: BTreeMap<&'static str, Entry>,
    /// Supplied keys that the experiment does not read.
    pub ignored: Vec<String>,
}

impl RunConfig {
    /// Resolves a file table, `--set` overrides and an optional subcommand.
    pub fn resolve(
        file: Option<Table>,
        overrides: &[String],
        command: Option<Experiment>,
    ) -> Result<Self, CliError> {
        let mut supplied: BTreeMap<&'static str, (Value, Source)> = BTreeMap::new();
        if let Some(table) = file {
            let mut flat = Vec::new();
            flatten(&table, &mut flat)?;
            for (k, v) in flat {
                let spec = lookup(&k)?;
                supplied.insert(
                    spec.key,
                    (check_kind(spec.key, spec.kind, v)?, Source::File),
                );
            }
        }
        for raw in overrides {
            let (k, v) = parse_override(raw)?;
            let spec = lookup(&k)?;
            supplied.insert(spec.key, (check_kind(spec.key, spec.kind, v)?, Source::Set));
        }

        let experiment = match (command, supplied.get("run.experiment")) {
            (Some(exp), Some((Value::String(s), _))) if s != exp.name() => {
                return Err(CliError::Config(format!(
                    "`run.experiment = \"{s}\"` conflicts with the `{exp}` subcommand"
                )))
            }
            (Some(exp), _) => {
                supplied.insert(
                    "run.experiment",
                    (Value::String(exp.name().into()), Source::Command),
                );
                exp
            }
            (None, Some((Value::String(s), _))) => Experiment::parse(s)?,
            _ => {
                return Err(CliError::Config(
                    "no experiment: use a subcommand or set `run.experiment`".into(),
                ))
            }
        };

        let given = |k: &str| supplied.get(k).is_some_and(|(_, s)| *s != Source::Default);
        let exclusive = [
            ("T1", "n1"),
            ("T2", "n2"),
            ("temperatures", "T_L"),
            ("temperatures", "T_R"),
            ("sweep.panel", "sweep.g"),
            ("sweep.panel", "sweep.temperatures"),
        ];
        let mut suppressed = Vec::new();
        for (a, b) in exclusive {
            if matches!(slot(a, experiment), Slot::Unused) {
                continue;
            }
            if given(a) && given(b) {
                return Err(CliError::Config(format!(
                    "`{a}` and `{b}` cannot both be set"
                )));
            }
            if given(a) {
                suppressed.push(b);
            }
        }

        let mut values = BTreeMap::new();
        let mut ignored = Vec::new();
        for spec in KEYS {
            let entry = match (slot(spec.key, experiment), supplied.remove(spec.key)) {
                (Slot::Unused, Some(_)) => {
                    ignored.push(spec.key.to_string());
                    None
                }
                (Slot::Unused, None) => None,
                (_, Some((value, source))) => Some(Entry { value, source }),
                (Slot::Default(value), None) if !suppressed.contains(&spec.key) => Some(Entry {
                    value,
                    source: Source::Default,
                }),
                _ => None,
            };
            if let Some(e) = entry {
                values.insert(spec.key, e);
            }
        }
        let cfg = Self {
            experiment,
            values,
            ignored,
        };
        cfg.output_format()?;
        Ok(cfg)
    }

    pub fn entry(&self, key: &str) -> Option<&Entry> {
        self.values.get(key)
    }

    pub fn source(&self, key: &str) -> Option<Source> {
        self.entry(key).map(|e| e.source)
    }

    pub fn real(&self, key: &str) -> Option<f64> {
        self.entry(key).and_then(|e| e.value.as_float())
    }

    /// Value of a key that always has a default for this experiment.
    pub fn req_real(&self, key: &str) -> f64 {
        self.real(key)
            .unwrap_or_else(|| panic!("`{key}` has a default for {}", self.experiment))
    }

    pub fn integer(&self, key: &str) -> Option<i64> {
        self.entry(key).and_then(|e| e.value.as_integer())
    }

    pub fn flag(&self, key: &str) -> Option<bool> {
        self.entry(key).and_then(|e| e.value.as_bool())
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.entry(key).and_then(|e| e.value.as_str())
    }

    pub fn reals(&self, key: &str) -> Option<Vec<f64>> {
        let items = self.entry(key)?.value.as_array()?;
        items.iter().map(Value::as_float).collect()
    }

    pub fn pairs(&self, key: &str) -> Option<Vec<(f64, f64)>> {
        let items = self.entry(key)?.value.as_array()?;
        items
            .iter()
            .map(|p| {
                let p = p.as_array()?;
                Some((p[0].as_float()?, p[1].as_float()?))
            })
            .collect()
    }

    pub fn texts(&self, key: &str) -> Option<Vec<String>> {
        let items = self.entry(key)?.value.as_array()?;
        items
            .iter()
            .map(|v| v.as_str().map(str::to_string))
            .collect()
    }

    pub fn output_format(&self) -> Result<OutputFormat, CliError> {
        match self.text("output.format").unwrap_or("csv") {
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            other => Err(CliError::Config(format!(
                "`output.format` must be csv or text, got `{other}`"
            ))),
        }
    }

    /// Resolved inputs as nested TOML, followed by a `[provenance]` table.
    ///
    /// Output settings are left out: where a table is written does not change it.
    pub fn to_toml(&self, result: &Table) -> String {
        let mut root = Table::new();
        let mut provenance = Table::new();
        for (key, entry) in &self.values {
            if key.starts_with("output.") {
                continue;
            }
            match key.split_once('.') {
                Some((section, name)) => {
                    let sec = root
                        .entry(section.to_string())
                        .or_insert_with(|| Value::Table(Table::new()));
                    if let Value::Table(t) = sec {
                        t.insert(name.to_string(), entry.value.clone());
                    }
                }
                None => {
                    root.insert(key.to_string(), entry.value.clone());
                }
            }
            provenance.insert(key.to_string(), Value::String(entry.source.as_str().into()));
        }
        root.insert("provenance".into(), Value::Table(provenance));
        if !result.is_empty() {
            root.insert("result".into(), Value::Table(result.clone()));
        }
        toml::to_string(&root).expect("plain TOML values serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Text,
}
