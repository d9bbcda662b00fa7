//! Synthetic company names and the spelling variants customs clerks produce.

use rand::seq::IndexedRandom;
use rand::Rng;

const SYLLABLES: &[&str] = &[
    "KA", "LO", "MI", "TEN", "DRA", "VEL", "SOR", "BRI", "NAK", "TOR", "GEL", "PRA", "MUN", "ZEL", "FAR", "QUI", "ROM",
    "BEL", "STA", "WIK", "HAN", "DOR", "LIS", "MER", "KRO", "TAV", "SIN", "JOR", "PEL", "VOR", "GRA", "NIS",
];

const SECTOR_WORDS: &[&str] = &[
    "Industries", "Trading", "Machinery", "Chemicals", "Textiles", "Components", "Electronics", "Metals", "Plastics",
];

/// Legal-form suffixes as they appear in raw records.
pub const RAW_SUFFIXES: &[&str] = &["S.A.", "Ltd.", "GmbH", "Inc.", "Co., Ltd.", "LLC", "S.R.L.", "Corp.", "AG", "S.p.A."];

/// Country tokens as they appear in raw records.
pub const RAW_COUNTRIES: &[&str] = &["(Germany)", "China", "USA", "Brasil", "(Italy)", "Japan", "Korea", "- Spain", "UK"];

fn title(word: &str) -> String {
    let mut out = String::with_capacity(word.len());
    for (i, ch) in word.chars().enumerate() {
        if i == 0 {
            out.push(ch);
        } else {
            out.extend(ch.to_lowercase());
        }
    }
    out
}

fn invented_word<R: Rng + ?Sized>(rng: &mut R, min_len: usize) -> String {
    let mut w = String::new();
    while w.len() < min_len || (w.len() < 12 && rng.random_bool(0.3)) {
        w.push_str(SYLLABLES.choose(rng).expect("non-empty"));
    }
    title(&w)
}

/// A company name whose distinctive part has at least eight letters,
/// optionally followed by a sector word and a legal suffix.
pub fn company_name<R: Rng + ?Sized>(rng: &mut R) -> String {
    let mut parts = vec![invented_word(rng, 8)];
    if rng.random_bool(0.3) {
        parts.push(invented_word(rng, 5));
    }
    if rng.random_bool(0.2) {
        parts.push(SECTOR_WORDS.choose(rng).expect("non-empty").to_string());
    }
    if rng.random_bool(0.5) {
        parts.push(RAW_SUFFIXES.choose(rng).expect("non-empty").to_string());
    }
    parts.join(" ")
}

/// Probabilities of each corruption operator.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionConfig {
    pub drop_char: f64,
    pub add_suffix: f64,
    pub add_country: f64,
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        Self {
            drop_char: 0.5,
            add_suffix: 0.4,
            add_country: 0.4,
        }
    }
}

/// Applies each operator with its probability; at least one is always
/// applied so the result differs from the input.
pub fn corrupt_name<R: Rng + ?Sized>(name: &str, cfg: &CorruptionConfig, rng: &mut R) -> String {
    loop {
        let mut out = name.to_string();
        if rng.random_bool(cfg.drop_char.clamp(0.0, 1.0)) {
            // Only letters of the first word, which is always long.
            let first_len = out.find(' ').unwrap_or(out.len());
            if first_len > 1 {
                let at = rng.random_range(1..first_len);
                out.remove(at);
            }
        }
        if rng.random_bool(cfg.add_suffix.clamp(0.0, 1.0)) {
            out.push(' ');
            out.push_str(RAW_SUFFIXES.choose(rng).expect("non-empty"));
        }
        if rng.random_bool(cfg.add_country.clamp(0.0, 1.0)) {
            out.push(' ');
            out.push_str(RAW_COUNTRIES.choose(rng).expect("non-empty"));
        }
        if out != name {
            return out;
        }
        if cfg.drop_char <= 0.0 && cfg.add_suffix <= 0.0 && cfg.add_country <= 0.0 {
            return out;
        }
    }
}
