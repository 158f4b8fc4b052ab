//! Flat `name = value` documents used for physical constants and recipe
//! settings.
//!
//! Blank lines are ignored and `#` starts a comment that runs to the end of
//! the line. Keys are unique; a repeated key is an error so that edits never
//! silently shadow each other.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvDocument {
    entries: BTreeMap<String, f64>,
}

impl KvDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `name = value`", lineno + 1))
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::Config(format!(
                    "line {}: `{}` is not a number",
                    lineno + 1,
                    value.trim()
                ))
            })?;
            if entries.insert(key.to_string(), value).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn get(&self, key: &str) -> Result<f64> {
        self.entries
            .get(key)
            .copied()
            .ok_or_else(|| Error::Config(format!("missing key `{key}`")))
    }

    pub fn get_or(&self, key: &str, default: f64) -> f64 {
        self.entries.get(key).copied().unwrap_or(default)
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.entries.insert(key.to_string(), value);
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Serializes with keys in sorted order; values use the shortest
    /// representation that round-trips.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v:?}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let doc = KvDocument::parse("# header\n\na = 1.5  # trailing\n b=2\n").unwrap();
        assert_eq!(doc.get("a").unwrap(), 1.5);
        assert_eq!(doc.get("b").unwrap(), 2.0);
        assert!(doc.get("c").is_err());
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        assert!(KvDocument::parse("a = 1\na = 2").is_err());
        assert!(KvDocument::parse("a 1").is_err());
        assert!(KvDocument::parse("a = x").is_err());
        assert!(KvDocument::parse("= 3").is_err());
    }

    #[test]
    fn text_round_trip() {
        let doc = KvDocument::parse("x = 0.1\ny = 83.33333333333333\n").unwrap();
        assert_eq!(KvDocument::parse(&doc.to_text()).unwrap(), doc);
    }
}
