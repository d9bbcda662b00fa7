use std::collections::HashMap;

use super::Thresholds;

/// Sorted multiset of two-byte sequences of a name with spaces removed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Bigrams(Vec<[u8; 2]>);

impl Bigrams {
    pub fn as_slice(&self) -> &[[u8; 2]] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Multiset intersection, in sorted order.
    pub fn common(&self, other: &Bigrams) -> Vec<[u8; 2]> {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out
    }
}

/// Normalized names are ASCII, so bytes are characters.
pub fn bigram_multiset(normalized: &str) -> Bigrams {
    let s: Vec<u8> = normalized.bytes().filter(|b| *b != b' ').collect();
    let mut v: Vec<[u8; 2]> = s.windows(2).map(|w| [w[0], w[1]]).collect();
    v.sort_unstable();
    Bigrams(v)
}

/// Bigram occurrence counts over a name corpus, for the log weight.
#[derive(Debug, Clone, Default)]
pub struct BigramFrequencies {
    counts: HashMap<[u8; 2], u64>,
    total: u64,
}

impl BigramFrequencies {
    pub fn from_names<'a>(names: impl IntoIterator<Item = &'a str>) -> Self {
        let mut f = Self::default();
        for n in names {
            for g in bigram_multiset(n).as_slice() {
                *f.counts.entry(*g).or_default() += 1;
                f.total += 1;
            }
        }
        f
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, g: [u8; 2]) -> u64 {
        self.counts.get(&g).copied().unwrap_or(0)
    }

    /// `ln(1 + N / freq)`; unseen bigrams count as seen once.
    pub fn weight(&self, g: [u8; 2]) -> f64 {
        (1.0 + self.total as f64 / self.count(g).max(1) as f64).ln()
    }

    fn weight_sum(&self, gs: &[[u8; 2]]) -> f64 {
        gs.iter().map(|g| self.weight(*g)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityScore {
    pub simple: f64,
    pub logw: f64,
}

/// Dice coefficients on bigram multisets, unweighted and log-weighted.
pub fn similscore(a: &str, b: &str, freq: &BigramFrequencies) -> SimilarityScore {
    score_bigrams(&bigram_multiset(a), &bigram_multiset(b), freq)
}

pub fn score_bigrams(a: &Bigrams, b: &Bigrams, freq: &BigramFrequencies) -> SimilarityScore {
    if a.is_empty() || b.is_empty() {
        return SimilarityScore { simple: 0.0, logw: 0.0 };
    }
    let common = a.common(b);
    let simple = 2.0 * common.len() as f64 / (a.len() + b.len()) as f64;
    let denom = freq.weight_sum(a.as_slice()) + freq.weight_sum(b.as_slice());
    let logw = if denom > 0.0 {
        (2.0 * freq.weight_sum(&common) / denom).min(1.0)
    } else {
        0.0
    };
    SimilarityScore { simple, logw }
}

/// Both scores above `both`, or one above `high` and the other above `low`.
pub fn high_similarity(s: SimilarityScore, t: &Thresholds) -> bool {
    let (hi, lo) = if s.simple >= s.logw { (s.simple, s.logw) } else { (s.logw, s.simple) };
    (s.simple > t.both && s.logw > t.both) || (hi > t.high && lo > t.low)
}
