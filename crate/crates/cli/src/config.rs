//! Run settings: command-line flags over a `key = value` file over defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Keys accepted in a config file.
pub const KNOWN_KEYS: &[&str] = &[
    "a", "b", "bound", "c", "c1", "c2", "cap", "chunk", "ell", "format", "hi", "histogram", "journal", "limit",
    "lo", "m", "n", "out", "poly", "power", "prime", "seed", "signed", "slack", "trunc", "verdicts", "workers",
    "x",
];

#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    effective: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Settings::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut file = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("config line {}: expected key = value", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KNOWN_KEYS.contains(&k) {
                return Err(CliError::Validation(format!("config line {}: unknown key `{k}`", i + 1)));
            }
            file.insert(k.to_string(), v.to_string());
        }
        Ok(Settings { file, effective: BTreeMap::new() })
    }

    fn in_file<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        self.file
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| CliError::Validation(format!("config key `{key}`: {e}"))))
            .transpose()
    }

    /// Flag, else config file, else nothing; recorded when present.
    pub fn opt<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => self.in_file(key)?,
        };
        if let Some(v) = &v {
            self.effective.insert(key.to_string(), v.to_string());
        }
        Ok(v)
    }

    pub fn get<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        let v = self.opt(key, flag)?.unwrap_or(default);
        self.effective.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn require<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        self.opt(key, flag)?.ok_or_else(|| CliError::Validation(format!("missing required setting `{key}`")))
    }

    /// Like [`Settings::require`], additionally rejecting zero.
    pub fn positive(&mut self, key: &str, flag: Option<u64>) -> Result<u64, CliError> {
        let v = self.require(key, flag)?;
        if v == 0 {
            return Err(CliError::Validation(format!("`{key}` must be positive")));
        }
        Ok(v)
    }

    /// Read without echoing; for settings that must not affect report bytes.
    pub fn silent<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.in_file(key),
        }
    }

    pub fn effective(&self) -> &BTreeMap<String, String> {
        &self.effective
    }
}
