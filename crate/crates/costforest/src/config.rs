//! Flat `key = value` configuration files.
//!
//! One entry per line, `#` starts a comment, keys are dotted names such as
//! `inducer.T` or `combiner.ga.population`. Every file must carry
//! `version = 1`. Readers take the keys they understand and then call
//! [`ConfigFile::finish`], which rejects whatever is left so typos are
//! reported with their line number.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

pub const CONFIG_VERSION: &str = "1";

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug)]
pub struct ConfigFile {
    origin: String,
    entries: BTreeMap<String, Entry>,
    used: RefCell<BTreeSet<String>>,
}

fn valid_key(k: &str) -> bool {
    !k.is_empty()
        && k.split('.').all(|part| !part.is_empty())
        && k.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

impl ConfigFile {
    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(CliError::Usage(format!("{origin}:{line}: expected `key = value`, found `{content}`")));
            };
            let (key, value) = (k.trim(), v.trim());
            if !valid_key(key) {
                return Err(CliError::Usage(format!("{origin}:{line}: malformed key `{key}`")));
            }
            if value.is_empty() {
                return Err(CliError::Usage(format!("{origin}:{line}: key `{key}` has no value")));
            }
            if let Some(prev) = entries.get(key) {
                let Entry { line: first, .. } = prev;
                return Err(CliError::Usage(format!(
                    "{origin}:{line}: key `{key}` repeats the one on line {first}"
                )));
            }
            entries.insert(key.to_string(), Entry { value: value.to_string(), line });
        }
        let cfg = Self { origin: origin.to_string(), entries, used: RefCell::new(BTreeSet::new()) };
        match cfg.get("version") {
            None => Err(CliError::Usage(format!("{origin}: missing required key `version`"))),
            Some(v) if v == CONFIG_VERSION => Ok(cfg),
            Some(v) => Err(CliError::Usage(format!(
                "{}: unsupported `version = {v}` (expected {CONFIG_VERSION})",
                cfg.position("version")
            ))),
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// `file:line` of `key`, or just the file when absent.
    pub fn position(&self, key: &str) -> String {
        match self.entries.get(key) {
            Some(e) => format!("{}:{}", self.origin, e.line),
            None => self.origin.clone(),
        }
    }

    /// Raw value of `key`, marking it as understood.
    pub fn get(&self, key: &str) -> Option<&str> {
        let e = self.entries.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(e.value.as_str())
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Keys starting with `prefix`, in sorted order.
    pub fn keys_with_prefix(&self, prefix: &str) -> Vec<String> {
        self.entries.keys().filter(|k| k.starts_with(prefix)).cloned().collect()
    }

    pub fn error(&self, key: &str, msg: impl std::fmt::Display) -> CliError {
        CliError::Usage(format!("{}: key `{key}`: {msg}", self.position(key)))
    }

    pub fn parse_value<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|e| self.error(key, format!("cannot parse `{v}`: {e}"))),
        }
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parse_value(key)?.unwrap_or(default))
    }

    pub fn required<T: FromStr>(&self, key: &str) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parse_value(key)?
            .ok_or_else(|| CliError::Usage(format!("{}: missing required key `{key}`", self.origin)))
    }

    /// Comma-separated list; empty items are dropped.
    pub fn list(&self, key: &str) -> Option<Vec<String>> {
        self.get(key).map(split_list)
    }

    /// Fails on the first key nobody asked for.
    pub fn finish(&self) -> CliResult<()> {
        let used = self.used.borrow();
        match self.entries.iter().find(|(k, _)| !used.contains(*k)) {
            Some((k, e)) => Err(CliError::Usage(format!("{}:{}: unknown key `{k}`", self.origin, e.line))),
            None => Ok(()),
        }
    }
}

pub fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty()).map(String::from).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_tracks_keys() {
        let c = ConfigFile::parse("version = 1\n# note\ninducer.T = 50  # trees\ntree.pruning = true\n", "a.cfg").unwrap();
        assert_eq!(c.parse_value::<usize>("inducer.T").unwrap(), Some(50));
        assert!(c.finish().is_err());
        assert!(c.parse_or("tree.pruning", false).unwrap());
        c.finish().unwrap();
    }

    #[test]
    fn errors_name_key_and_line() {
        let e = ConfigFile::parse("version = 1\n\ninducer..T = 3\n", "x.cfg").unwrap_err().to_string();
        assert!(e.contains("x.cfg:3") && e.contains("inducer..T"), "{e}");
        let e = ConfigFile::parse("version = 1\nnot a pair\n", "x.cfg").unwrap_err().to_string();
        assert!(e.contains("x.cfg:2"), "{e}");
        let c = ConfigFile::parse("version = 1\ninducer.T = many\n", "x.cfg").unwrap();
        let e = c.parse_value::<usize>("inducer.T").unwrap_err().to_string();
        assert!(e.contains("x.cfg:2") && e.contains("inducer.T"), "{e}");
        let c = ConfigFile::parse("version = 1\ninducer.Tees = 4\n", "x.cfg").unwrap();
        let e = c.finish().unwrap_err().to_string();
        assert!(e.contains("x.cfg:2") && e.contains("inducer.Tees"), "{e}");
        assert!(ConfigFile::parse("a = 1\n", "x.cfg").unwrap_err().to_string().contains("version"));
        assert!(ConfigFile::parse("version = 2\n", "x.cfg").is_err());
        assert!(ConfigFile::parse("version = 1\na = 1\na = 2\n", "x.cfg").unwrap_err().to_string().contains("line 2"));
    }
}
