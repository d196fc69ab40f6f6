//! Plain-text `key = value` blocks with `[section]` headers.
//!
//! Sections may repeat (each header opens a new block), `#` starts a comment,
//! and values are kept verbatim for the owning module to parse.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Section {
    pub name: String,
    pub line: usize,
    entries: Vec<(String, String, usize)>,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            line: 0,
            entries: Vec::new(),
        }
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _, _)| *k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key, value, 0)),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v, _)| (k.as_str(), v.as_str()))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, _)| v.as_str())
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, _, l)| *l)
            .unwrap_or(self.line)
    }

    pub fn err(&self, key: &str, msg: impl std::fmt::Display) -> Error {
        Error::Config {
            line: self.line_of(key),
            msg: format!("[{}] {key}: {msg}", self.name),
        }
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Config {
            line: self.line,
            msg: format!("[{}] missing required key `{key}`", self.name),
        })
    }

    pub fn parse_opt<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|e| self.err(key, e)),
        }
    }

    pub fn parse_or<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.parse_opt(key)?.unwrap_or(default))
    }

    pub fn parse_req<T>(&self, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        let v = self.require(key)?;
        v.parse::<T>().map_err(|e| self.err(key, e))
    }

    /// Comma-separated list.
    pub fn list<T>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => parse_list(v).map(Some).map_err(|e| self.err(key, e)),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[{}]", self.name);
        for (k, v, _) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

pub fn parse_list<T>(v: &str) -> std::result::Result<Vec<T>, String>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| format!("`{s}`: {e}")))
        .collect()
}

pub fn parse_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or(Error::Config {
                line: line_no,
                msg: format!("malformed section header `{line}`"),
            })?;
            sections.push(Section {
                name: name.trim().to_string(),
                line: line_no,
                entries: Vec::new(),
            });
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(Error::Config {
            line: line_no,
            msg: format!("expected `key = value`, got `{line}`"),
        })?;
        let section = sections.last_mut().ok_or(Error::Config {
            line: line_no,
            msg: "key outside of any [section]".into(),
        })?;
        let key = k.trim().to_string();
        if section.entries.iter().any(|(existing, _, _)| *existing == key) {
            return Err(Error::Config {
                line: line_no,
                msg: format!("duplicate key `{key}` in [{}]", section.name),
            });
        }
        section.entries.push((key, v.trim().to_string(), line_no));
    }
    Ok(sections)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_repeated_sections_and_comments() {
        let text = "# header\n[run]\nscheme = plain # trailing\nlr=0.01\n\n[run]\nscheme = minibatch\nB = 100\n";
        let s = parse_sections(text).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].get("scheme"), Some("plain"));
        assert_eq!(s[0].parse_req::<f64>("lr").unwrap(), 0.01);
        assert_eq!(s[1].parse_req::<usize>("B").unwrap(), 100);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_sections("[a]\nx = 1\nnot a pair\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }));
        let err = parse_sections("x = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
        let s = parse_sections("[a]\nx = 1\ny = nope\n").unwrap();
        match s[0].parse_req::<f64>("y").unwrap_err() {
            Error::Config { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_keys_rejected() {
        assert!(parse_sections("[a]\nx = 1\nx = 2\n").is_err());
    }
}
