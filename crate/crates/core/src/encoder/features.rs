//! Hashed character n-gram featurization.
//!
//! Text is lowercased and split around the reserved separator tokens. Each
//! separator contributes a single atomic feature; the remaining segments are
//! decomposed into character n-grams over the configured range (including
//! whitespace, so word boundaries are encoded). Features are FNV-1a hashed
//! into a power-of-two bucket space with counts.

use super::EncoderConfig;
use crate::corpus::{JOB_TITLE_SEP, QUALIFICATION_SEP, SKILL_SEP};
use std::collections::HashMap;

/// Sparse feature counts, sorted by bucket index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseFeatures {
    entries: Vec<(u32, f32)>,
}

impl SparseFeatures {
    pub fn from_counts(counts: HashMap<u32, f32>) -> Self {
        let mut entries: Vec<(u32, f32)> = counts.into_iter().collect();
        entries.sort_unstable_by_key(|(idx, _)| *idx);
        Self { entries }
    }

    pub fn entries(&self) -> &[(u32, f32)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|(_, v)| {
                let v = *v as f64;
                v * v
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Scale all values by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|(i, v)| (*i, (*v as f64 * factor) as f32))
                .collect(),
        }
    }

    /// Dot product of two sorted sparse vectors.
    pub fn dot(&self, other: &Self) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0f64;
        while i < self.entries.len() && j < other.entries.len() {
            match self.entries[i].0.cmp(&other.entries[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.entries[i].1 as f64 * other.entries[j].1 as f64;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

/// FNV-1a, 64-bit. Stable across platforms and releases, unlike the
/// standard library's default hasher.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

const SEPARATORS: [&str; 3] = [JOB_TITLE_SEP, QUALIFICATION_SEP, SKILL_SEP];

/// Featurize `text` under the encoder's n-gram configuration.
///
/// Separator tokens are atomic features and are never split into n-grams.
/// Strings shorter than the minimum n-gram length contribute nothing beyond
/// any atomic tokens they contain.
pub fn featurize(text: &str, config: &EncoderConfig) -> SparseFeatures {
    let mask = (config.hash_buckets - 1) as u64;
    let mut counts: HashMap<u32, f32> = HashMap::new();
    let mut bump = |bytes: &[u8]| {
        let bucket = (fnv1a(bytes) & mask) as u32;
        *counts.entry(bucket).or_insert(0.0) += 1.0;
    };

    for (segment, is_separator) in split_on_separators(text) {
        if is_separator {
            bump(segment.as_bytes());
            continue;
        }
        let chars: Vec<char> = segment.to_lowercase().chars().collect();
        for n in config.ngram_min..=config.ngram_max {
            if chars.len() < n {
                break;
            }
            let mut gram = String::with_capacity(n * 2);
            for window in chars.windows(n) {
                gram.clear();
                gram.extend(window.iter());
                bump(gram.as_bytes());
            }
        }
    }
    SparseFeatures::from_counts(counts)
}

/// Yield (segment, is_separator) pieces left to right.
fn split_on_separators(text: &str) -> Vec<(&str, bool)> {
    let mut pieces = Vec::new();
    let mut rest = text;
    loop {
        let hit = SEPARATORS
            .iter()
            .filter_map(|sep| rest.find(sep).map(|pos| (pos, *sep)))
            .min_by_key(|(pos, _)| *pos);
        match hit {
            Some((pos, sep)) => {
                if pos > 0 {
                    pieces.push((&rest[..pos], false));
                }
                pieces.push((&rest[pos..pos + sep.len()], true));
                rest = &rest[pos + sep.len()..];
            }
            None => {
                if !rest.is_empty() {
                    pieces.push((rest, false));
                }
                return pieces;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> EncoderConfig {
        EncoderConfig::default()
    }

    #[test]
    fn empty_text_is_empty() {
        assert!(featurize("", &config()).is_empty());
    }

    #[test]
    fn below_min_ngram_yields_nothing() {
        assert!(featurize("ab", &config()).is_empty());
    }

    #[test]
    fn exactly_one_trigram() {
        let f = featurize("abc", &config());
        assert_eq!(f.nnz(), 1);
        assert_eq!(f.entries()[0].1, 1.0);
    }

    #[test]
    fn short_text_with_separator_keeps_atomic_token() {
        let f = featurize("[SKILL_SEP] ab", &config());
        // the atomic token plus nothing from the 2-char segment
        assert_eq!(f.nnz(), 1);
    }

    #[test]
    fn separators_are_atomic_not_ngrammed() {
        let with_sep = featurize("[JOB_TITLE_SEP]", &config());
        assert_eq!(with_sep.nnz(), 1);
        // Lowercased variant of the same characters is n-grammed instead and
        // must not collide with the atomic token by construction.
        let spelled = featurize("job_title_sep", &config());
        assert!(spelled.nnz() > 1);
    }

    #[test]
    fn counts_accumulate() {
        let f = featurize("aaaa", &config());
        // trigrams: "aaa" twice; 4-gram: "aaaa" once
        let total: f32 = f.entries().iter().map(|(_, v)| v).sum();
        assert_eq!(total, 3.0);
    }

    #[test]
    fn lowercasing_merges_case_variants() {
        let a = featurize("Bäcker", &config());
        let b = featurize("bäcker", &config());
        assert_eq!(a, b);
    }

    #[test]
    fn sparse_dot_matches_dense() {
        let a = featurize("kanalbau", &config());
        let b = featurize("kanalbauer", &config());
        let mut dense_a: HashMap<u32, f64> = HashMap::new();
        for (i, v) in a.entries() {
            dense_a.insert(*i, *v as f64);
        }
        let expect: f64 = b
            .entries()
            .iter()
            .map(|(i, v)| dense_a.get(i).copied().unwrap_or(0.0) * *v as f64)
            .sum();
        assert!((a.dot(&b) - expect).abs() < 1e-9);
    }
}
