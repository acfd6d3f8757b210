//! Minimal `key = value` INI documents with line-numbered diagnostics.
//!
//! Lines starting with `#` or `;` are comments. Keys must sit inside a
//! `[section]`; duplicate sections and keys are rejected. [`IniReader`]
//! tracks which keys were consumed so that leftovers can be reported.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct IniEntry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IniSection {
    pub name: String,
    pub line: usize,
    pub entries: Vec<IniEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IniDocument {
    pub path: String,
    pub sections: Vec<IniSection>,
}

fn parse_error(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_string(), line, msg: msg.into() }
}

pub fn parse_ini(text: &str, path: &str) -> Result<IniDocument> {
    let mut sections: Vec<IniSection> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with(';') {
            continue;
        }
        if let Some(rest) = t.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_error(path, line, "unterminated section header"))?
                .trim();
            if name.is_empty() {
                return Err(parse_error(path, line, "empty section name"));
            }
            if let Some(prev) = sections.iter().find(|s| s.name == name) {
                return Err(parse_error(path, line, format!("duplicate section [{name}] (first at line {})", prev.line)));
            }
            sections.push(IniSection { name: name.to_string(), line, entries: Vec::new() });
            continue;
        }
        let (key, value) = t.split_once('=').ok_or_else(|| parse_error(path, line, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(parse_error(path, line, "empty key"));
        }
        let section = sections.last_mut().ok_or_else(|| parse_error(path, line, format!("key `{key}` outside any section")))?;
        if section.entries.iter().any(|e| e.key == key) {
            return Err(parse_error(path, line, format!("duplicate key [{}] {key}", section.name)));
        }
        section.entries.push(IniEntry { key: key.to_string(), value: value.to_string(), line });
    }
    Ok(IniDocument { path: path.to_string(), sections })
}

/// Typed access to an [`IniDocument`] that remembers consumed keys.
#[derive(Debug)]
pub struct IniReader<'a> {
    doc: &'a IniDocument,
    used: RefCell<BTreeSet<(String, String)>>,
    sections_seen: RefCell<BTreeSet<String>>,
}

impl<'a> IniReader<'a> {
    pub fn new(doc: &'a IniDocument) -> Self {
        Self { doc, used: RefCell::default(), sections_seen: RefCell::default() }
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections_seen.borrow_mut().insert(section.to_string());
        self.doc.sections.iter().any(|s| s.name == section)
    }

    pub fn entry(&self, section: &str, key: &str) -> Option<&'a IniEntry> {
        self.sections_seen.borrow_mut().insert(section.to_string());
        let e = self.doc.sections.iter().find(|s| s.name == section)?.entries.iter().find(|e| e.key == key)?;
        self.used.borrow_mut().insert((section.to_string(), key.to_string()));
        Some(e)
    }

    /// Error located at `entry`.
    pub fn error(&self, entry: &IniEntry, section: &str, msg: impl std::fmt::Display) -> Error {
        parse_error(&self.doc.path, entry.line, format!("[{section}] {}: {msg}", entry.key))
    }

    /// Error for a key that should have been present.
    pub fn missing(&self, section: &str, key: &str) -> Error {
        let line = self.doc.sections.iter().find(|s| s.name == section).map_or(0, |s| s.line);
        parse_error(&self.doc.path, line, format!("missing key [{section}] {key}"))
    }

    pub fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entry(section, key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|err| self.error(e, section, format!("`{}`: {err}", e.value))),
        }
    }

    pub fn require<T: FromStr>(&self, section: &str, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(section, key)?.ok_or_else(|| self.missing(section, key))
    }

    /// Comma- or whitespace-separated list; `;`-separated when items contain
    /// commas themselves.
    pub fn list<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(e) = self.entry(section, key) else { return Ok(None) };
        let sep: &[char] = if e.value.contains(';') { &[';'] } else { &[',', ' ', '\t'] };
        e.value
            .split(sep)
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<T>().map_err(|err| self.error(e, section, format!("`{s}`: {err}"))))
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    /// Fails on the first section or key that was never looked up.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        let seen = self.sections_seen.borrow();
        for s in &self.doc.sections {
            if !seen.contains(&s.name) {
                return Err(parse_error(&self.doc.path, s.line, format!("unknown section [{}]", s.name)));
            }
            for e in &s.entries {
                if !used.contains(&(s.name.clone(), e.key.clone())) {
                    return Err(parse_error(&self.doc.path, e.line, format!("unknown key [{}] {}", s.name, e.key)));
                }
            }
        }
        Ok(())
    }
}
