//! Flat `key = value` scenario configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are
//! comma-separated; Müller start points are `x y` pairs separated by `;`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{LabError, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(LabError::Parse {
                    line: i + 1,
                    message: format!("expected 'key = value', got '{line}'"),
                });
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(LabError::Parse {
                    line: i + 1,
                    message: "empty key".into(),
                });
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(LabError::Parse {
                    line: i + 1,
                    message: format!("duplicate key '{key}'"),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::ConfigIo {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Inserts or replaces a key, as the CLI overrides do.
    pub fn set(&mut self, key: &str, value: impl Display) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn reader(&self) -> Reader<'_> {
        Reader {
            raw: self,
            used: BTreeSet::new(),
        }
    }
}

/// Typed access to a [`RawConfig`] that remembers which keys were read, so
/// leftovers can be rejected.
pub struct Reader<'a> {
    raw: &'a RawConfig,
    used: BTreeSet<&'a str>,
}

fn invalid(key: &str, value: &str, message: impl Display) -> LabError {
    LabError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        message: message.to_string(),
    }
}

impl<'a> Reader<'a> {
    fn raw_value(&mut self, key: &str) -> Option<&'a str> {
        let (k, v) = self.raw.entries.get_key_value(key)?;
        self.used.insert(k.as_str());
        Some(v.as_str())
    }

    pub fn get<T>(&mut self, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.raw_value(key) {
            Some(v) => v.parse().map_err(|e| invalid(key, v, e)),
            None => Ok(default),
        }
    }

    pub fn optional<T>(&mut self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.raw_value(key)
            .map(|v| v.parse().map_err(|e| invalid(key, v, e)))
            .transpose()
    }

    pub fn list<T>(&mut self, key: &str, default: Vec<T>) -> Result<Vec<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let Some(v) = self.raw_value(key) else {
            return Ok(default);
        };
        let items: Vec<T> = v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e| invalid(key, v, e)))
            .collect::<Result<_>>()?;
        if items.is_empty() {
            return Err(invalid(key, v, "empty list"));
        }
        Ok(items)
    }

    /// `x y; x y; ...`
    pub fn points(&mut self, key: &str, default: Vec<[f64; 2]>) -> Result<Vec<[f64; 2]>> {
        let Some(v) = self.raw_value(key) else {
            return Ok(default);
        };
        let mut out = Vec::new();
        for item in v.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let coords: Vec<f64> = item
                .split_whitespace()
                .map(|c| c.parse().map_err(|e| invalid(key, v, e)))
                .collect::<Result<_>>()?;
            match coords.as_slice() {
                [x, y] => out.push([*x, *y]),
                _ => return Err(invalid(key, v, format!("point '{item}' needs two coordinates"))),
            }
        }
        if out.is_empty() {
            return Err(invalid(key, v, "empty list"));
        }
        Ok(out)
    }

    /// Rejects keys that were never read.
    pub fn finish(self) -> Result<()> {
        match self
            .raw
            .entries
            .keys()
            .find(|k| !self.used.contains(k.as_str()))
        {
            Some(k) => Err(LabError::UnknownKey(k.clone())),
            None => Ok(()),
        }
    }
}

/// Checks a value and names the key on failure.
pub fn ensure(ok: bool, key: &str, value: impl Display, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(invalid(key, &value.to_string(), message))
    }
}
