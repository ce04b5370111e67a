//! Flag resolution: command-line flag, then config file, then default.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use clap::ValueEnum;

use crate::CliError;

pub const SEED_ENV: &str = "DESCFORGE_SEED";

const KNOWN_KEYS: &[&str] = &[
    "activity-col",
    "alpha",
    "coefficients",
    "cut-stride",
    "cv",
    "drop-constant",
    "folds",
    "informative",
    "iterations",
    "m",
    "max-lv",
    "max-selected",
    "mc-iterations",
    "min-subset",
    "nlv",
    "noise",
    "out-dir",
    "p",
    "rank-one",
    "replicates",
    "runs",
    "sample-ratio",
    "seed",
    "subset",
    "test-fraction",
    "threads",
];

/// Values of a flat TOML config file, stored as strings keyed by long flag
/// name. Underscores in keys are accepted in place of dashes. Arrays are
/// joined with commas.
#[derive(Debug, Default, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
            .map_err(|e| CliError::usage(format!("config {}: {}", path.display(), e.message())))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::usage(e.message().to_owned()))?;
        let mut values = BTreeMap::new();
        for (key, value) in table {
            let norm = key.replace('_', "-");
            if !KNOWN_KEYS.contains(&norm.as_str()) {
                return Err(CliError::usage(format!("unknown config key `{key}`")));
            }
            values.insert(norm, scalar_text(&key, &value)?);
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn value<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.optional(flag, key)?.unwrap_or(default))
    }

    pub fn optional<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.get(key).map(|raw| parse_value(key, raw)).transpose()
    }

    pub fn list<T: FromStr>(
        &self,
        flag: Option<Vec<T>>,
        key: &str,
        default: Vec<T>,
    ) -> Result<Vec<T>, CliError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.get(key) {
            Some(raw) => raw.split(',').map(|s| parse_value(key, s.trim())).collect(),
            None => Ok(default),
        }
    }

    pub fn optional_list<T: FromStr>(
        &self,
        flag: Option<Vec<T>>,
        key: &str,
    ) -> Result<Option<Vec<T>>, CliError> {
        if flag.is_none() && self.get(key).is_none() {
            return Ok(None);
        }
        self.list(flag, key, Vec::new()).map(Some)
    }

    /// A boolean switch: set on the command line, or `true` in the config.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        self.value(None, key, false)
    }

    pub fn choice<T: ValueEnum>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.get(key)
            .map(|raw| {
                T::from_str(raw, true)
                    .map_err(|_| CliError::usage(format!("invalid value `{raw}` for `{key}`")))
            })
            .transpose()
    }

    /// Seed order: flag, config file, `DESCFORGE_SEED`, default.
    pub fn seed(&self, flag: Option<u64>, default: u64) -> Result<u64, CliError> {
        if let Some(s) = self.optional(flag, "seed")? {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(raw) => parse_value(SEED_ENV, raw.trim()),
            Err(std::env::VarError::NotPresent) => Ok(default),
            Err(e) => Err(CliError::usage(format!("{SEED_ENV}: {e}"))),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.parse()
        .map_err(|_| CliError::usage(format!("invalid value `{raw}` for `{key}`")))
}

fn scalar_text(key: &str, value: &toml::Value) -> Result<String, CliError> {
    use toml::Value;
    match value {
        Value::String(s) => Ok(s.clone()),
        Value::Integer(i) => Ok(i.to_string()),
        Value::Float(f) => Ok(f.to_string()),
        Value::Boolean(b) => Ok(b.to_string()),
        Value::Array(items) => Ok(items
            .iter()
            .map(|v| scalar_text(key, v))
            .collect::<Result<Vec<_>, _>>()?
            .join(",")),
        _ => Err(CliError::usage(format!(
            "config key `{key}` must be a scalar or array"
        ))),
    }
}
