//! Supplier-name cleaning: normalization, multinational aliases, bigram
//! similarity and within-importer clustering.

mod bigram;
mod cluster;
pub mod tokens;

pub use bigram::*;
pub use cluster::*;

use std::path::Path;

use thiserror::Error;

use crate::kv_config;

#[derive(Debug, Error)]
pub enum NameError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Invalid { path: String, line: u64, message: String },
}

/// Score cutoffs of the high-similarity rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    /// Both scores above this.
    pub both: f64,
    /// Or one score above `high`...
    pub high: f64,
    /// ...and the other above `low`.
    pub low: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            both: 0.65,
            high: 0.8,
            low: 0.35,
        }
    }
}

kv_config!(Thresholds { both, high, low });

/// Token lists used by normalization and canonicalization. Entries are in
/// normalized form (uppercase words separated by single spaces).
#[derive(Debug, Clone, PartialEq)]
pub struct NameLists {
    pub suffixes: Vec<String>,
    pub countries: Vec<String>,
    /// `(alias, canonical)`, checked in order.
    pub aliases: Vec<(String, String)>,
}

impl Default for NameLists {
    fn default() -> Self {
        Self {
            suffixes: tokens::SUFFIXES.iter().map(|s| s.to_string()).collect(),
            countries: tokens::COUNTRIES.iter().map(|s| s.to_string()).collect(),
            aliases: tokens::ALIASES.iter().map(|(a, c)| (a.to_string(), c.to_string())).collect(),
        }
    }
}

fn read_lines(path: &Path) -> Result<Vec<(u64, String)>, NameError> {
    let text = std::fs::read_to_string(path).map_err(|e| NameError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i as u64 + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect())
}

impl NameLists {
    /// One token per line; entries are normalized on load.
    pub fn read_tokens(path: &Path) -> Result<Vec<String>, NameError> {
        Ok(read_lines(path)?
            .into_iter()
            .map(|(_, l)| clean_chars(&l))
            .filter(|t| !t.is_empty())
            .collect())
    }

    /// One `ALIAS=CANONICAL` per line; a bare name is its own canonical.
    pub fn read_aliases(path: &Path) -> Result<Vec<(String, String)>, NameError> {
        let mut out = Vec::new();
        for (line, l) in read_lines(path)? {
            let (a, c) = l.split_once('=').unwrap_or((&l, &l));
            let (a, c) = (clean_chars(a), clean_chars(c));
            if a.is_empty() || c.is_empty() {
                return Err(NameError::Invalid {
                    path: path.display().to_string(),
                    line,
                    message: format!("empty alias in `{l}`"),
                });
            }
            out.push((a, c));
        }
        Ok(out)
    }
}

/// Uppercase, drop everything outside `[A-Z0-9 ]`, collapse whitespace.
fn clean_chars(raw: &str) -> String {
    let up: String = raw
        .chars()
        .flat_map(char::to_uppercase)
        .filter(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c.is_whitespace())
        .collect();
    up.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Position of `needle` as a run of whole words in `words`.
fn find_words(words: &[&str], needle: &[&str]) -> Option<usize> {
    if needle.is_empty() || needle.len() > words.len() {
        return None;
    }
    words.windows(needle.len()).position(|w| w == needle)
}

/// Cleans a raw supplier name and strips country and legal-form tokens.
/// Stripping repeats until nothing changes, so the result is a fixed point.
pub fn normalize_name(raw: &str, lists: &NameLists) -> String {
    let mut drop: Vec<Vec<&str>> = lists
        .suffixes
        .iter()
        .chain(&lists.countries)
        .map(|t| t.split(' ').filter(|w| !w.is_empty()).collect::<Vec<_>>())
        .filter(|t| !t.is_empty())
        .collect();
    // Longest first, so "CO LTD" goes before "CO".
    drop.sort_by_key(|t| std::cmp::Reverse(t.len()));
    let cleaned = clean_chars(raw);
    let mut words: Vec<&str> = cleaned.split(' ').filter(|w| !w.is_empty()).collect();
    loop {
        let before = words.len();
        for t in &drop {
            while let Some(at) = find_words(&words, t) {
                words.drain(at..at + t.len());
            }
        }
        if words.len() == before {
            return words.join(" ");
        }
    }
}

/// The canonical multinational name if any alias occurs as whole words.
pub fn canonicalize_multinational(normalized: &str, aliases: &[(String, String)]) -> Option<String> {
    let words: Vec<&str> = normalized.split(' ').filter(|w| !w.is_empty()).collect();
    aliases.iter().find_map(|(a, c)| {
        let needle: Vec<&str> = a.split(' ').collect();
        find_words(&words, &needle).map(|_| c.clone())
    })
}

/// One supplier name after cleaning.
#[derive(Debug, Clone, PartialEq)]
pub struct NameRecord {
    pub raw: String,
    pub normalized: String,
    pub canonical: Option<String>,
    pub cluster_id: Option<u64>,
}

impl NameRecord {
    pub fn new(raw: &str, lists: &NameLists) -> Self {
        let normalized = normalize_name(raw, lists);
        let canonical = canonicalize_multinational(&normalized, &lists.aliases);
        Self {
            raw: raw.to_string(),
            normalized,
            canonical,
            cluster_id: None,
        }
    }

    /// Nothing left after normalization.
    pub fn is_empty(&self) -> bool {
        self.normalized.is_empty()
    }

    /// The name used for matching: the alias target if one applied.
    pub fn working(&self) -> &str {
        self.canonical.as_deref().unwrap_or(&self.normalized)
    }
}
