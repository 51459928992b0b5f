//! Flat `key = value` run files with optional `[section]` headers.
//!
//! Keys are the long flag names of the command line (`xi`, `theta-grid`,
//! ...); sections only group them. Values from the file are spliced in
//! front of the real arguments, so flags given on the command line win.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    pub source: String,
    pub entries: Vec<Entry>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        parse(&text, &path.display().to_string())
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().rev().find(|e| e.key == key)
    }

    pub fn lines(&self) -> BTreeMap<String, usize> {
        self.entries.iter().map(|e| (e.key.clone(), e.line)).collect()
    }
}

pub fn parse(text: &str, source: &str) -> Result<ConfigFile> {
    let mut entries = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = match raw.find(['#', ';']) {
            Some(c) => &raw[..c],
            None => raw,
        }
        .trim();
        if body.is_empty() {
            continue;
        }
        if body.starts_with('[') {
            if !body.ends_with(']') || body.len() < 3 {
                return Err(Error::Config(format!("{source}:{line}: malformed section header `{body}`")));
            }
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(Error::Config(format!("{source}:{line}: expected `key = value`, got `{body}`")));
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            return Err(Error::Config(format!("{source}:{line}: invalid key `{}`", key)));
        }
        let value = value.trim().trim_matches('"').to_string();
        entries.push(Entry { key, value, line });
    }
    Ok(ConfigFile { source: source.to_string(), entries })
}
