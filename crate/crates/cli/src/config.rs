//! Flat `key = value` run configuration.
//!
//! Values come from built-in defaults, then an optional config file, then
//! command-line overrides. Every key a subcommand accepts is declared up
//! front; anything else is rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Result;

/// An error in how the program was invoked (bad flag, config key or missing
/// input). Reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    command: &'static str,
    values: BTreeMap<&'static str, String>,
}

impl RunConfig {
    /// `keys` pairs each accepted key with its default (empty = unset).
    pub fn new(command: &'static str, keys: &[(&'static str, &str)]) -> Self {
        Self {
            command,
            values: keys.iter().map(|(k, v)| (*k, v.to_string())).collect(),
        }
    }

    fn key(&self, key: &str) -> Result<&'static str> {
        self.values
            .keys()
            .find(|k| **k == key)
            .copied()
            .ok_or_else(|| usage(format!("unknown config key `{key}` for `{}`", self.command)))
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = self.key(key.trim())?;
        self.values.insert(key, value.trim().to_string());
        Ok(())
    }

    /// Applies a `KEY=VALUE` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| usage(format!("expected KEY=VALUE, got `{pair}`")))?;
        self.set(k, v)
    }

    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config file {}: {e}", path.display())))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                usage(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    i + 1
                ))
            })?;
            self.set(k, v)
                .map_err(|e| usage(format!("{}:{}: {e}", path.display(), i + 1)))?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .filter(|v| !v.is_empty())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| usage(format!("`{key}` is required for `{}`", self.command)))
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|e| usage(format!("invalid value `{raw}` for `{key}`: {e}")))
    }

    /// A required input path that must exist.
    pub fn input(&self, key: &str) -> Result<PathBuf> {
        let path = PathBuf::from(self.require(key)?);
        if !path.is_file() {
            return Err(usage(format!("{key} file not found: {}", path.display())));
        }
        Ok(path)
    }

    pub fn output(&self, key: &str) -> Result<PathBuf> {
        Ok(PathBuf::from(self.require(key)?))
    }

    /// The fully resolved configuration, one `key = value` per line.
    pub fn echo(&self) -> String {
        self.values
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

/// Parses a feature-id list such as `1-17` or `1-6,9,18-20`.
pub fn parse_feature_ids(spec: &str) -> Result<Vec<u8>> {
    let mut ids = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || usage(format!("invalid feature list `{spec}`"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u8, u8) = (
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                );
                if a > b {
                    return Err(bad());
                }
                ids.extend(a..=b);
            }
            None => ids.push(part.parse().map_err(|_| bad())?),
        }
    }
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}
