//! Anchor-positive-negative triplet construction.
//!
//! Triplets are keyed on KldB code prefixes under two schemes: the 4-digit
//! subgroup prefix and the requirement digit. For every record usable as an
//! anchor, positives are drawn from the anchor's key bucket and negatives
//! from its complement, both uniformly without replacement. Sampling is
//! driven entirely by the seed: each anchor gets its own deterministic
//! random substream derived from (seed, anchor index), so output does not
//! depend on traversal or thread order.

use crate::corpus::{ComposedQuery, OccupationRecord, QualificationLabels};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TripletError {
    #[error("triplet construction needs at least 2 distinct keys, found {0}")]
    InsufficientKeys(usize),
}

/// Which code prefix defines "same class" for a triplet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripletScheme {
    /// Key on the 4-digit subgroup prefix.
    Subgroup4Digit,
    /// Key on the requirement digit (5th).
    RequirementDigit,
}

impl TripletScheme {
    pub fn key(&self, record: &OccupationRecord) -> String {
        match self {
            TripletScheme::Subgroup4Digit => record.code.subgroup().to_string(),
            TripletScheme::RequirementDigit => record.code.requirement_level().to_string(),
        }
    }
}

/// One contrastive training example over composed query texts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triplet {
    pub anchor: String,
    pub positive: String,
    pub negative: String,
    pub scheme: TripletScheme,
    pub anchor_key: String,
}

/// Output of one [`build_triplets`] run.
#[derive(Debug, Default)]
pub struct TripletBatch {
    pub triplets: Vec<Triplet>,
    /// Anchors skipped because their key bucket had no other usable member.
    pub skipped_anchors: usize,
}

/// Build up to `per_anchor` triplets for every record under `scheme`.
///
/// The i-th sampled positive is paired with the i-th sampled negative.
/// Anchors whose bucket has no other member (or no textually distinct
/// member) are skipped and counted.
pub fn build_triplets(
    records: &[OccupationRecord],
    scheme: TripletScheme,
    per_anchor: usize,
    seed: u64,
) -> Result<TripletBatch, TripletError> {
    build_triplets_with(
        &QualificationLabels::default(),
        records,
        scheme,
        per_anchor,
        seed,
    )
}

/// [`build_triplets`] with explicit qualification slot labels.
pub fn build_triplets_with(
    labels: &QualificationLabels,
    records: &[OccupationRecord],
    scheme: TripletScheme,
    per_anchor: usize,
    seed: u64,
) -> Result<TripletBatch, TripletError> {
    assert!(per_anchor >= 1, "per_anchor must be at least 1");

    let texts: Vec<ComposedQuery> = records.iter().map(|r| r.compose_with(labels)).collect();
    let keys: Vec<String> = records.iter().map(|r| scheme.key(r)).collect();

    let mut buckets: HashMap<&str, Vec<usize>> = HashMap::new();
    for (idx, key) in keys.iter().enumerate() {
        buckets.entry(key.as_str()).or_default().push(idx);
    }
    if buckets.len() < 2 {
        return Err(TripletError::InsufficientKeys(buckets.len()));
    }

    let mut batch = TripletBatch::default();
    for anchor_idx in 0..records.len() {
        let anchor_key = &keys[anchor_idx];
        let anchor_text = &texts[anchor_idx];

        let mut positives: Vec<usize> = buckets[anchor_key.as_str()]
            .iter()
            .copied()
            .filter(|&i| i != anchor_idx && texts[i] != *anchor_text)
            .collect();
        if positives.is_empty() {
            batch.skipped_anchors += 1;
            continue;
        }
        let mut negatives: Vec<usize> = (0..records.len())
            .filter(|&i| keys[i] != *anchor_key)
            .collect();

        // Independent substream per anchor keeps output invariant under
        // any parallel traversal of the anchor loop.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(anchor_idx as u64 + 1);

        positives.shuffle(&mut rng);
        negatives.shuffle(&mut rng);

        let n = per_anchor.min(positives.len()).min(negatives.len());
        for i in 0..n {
            batch.triplets.push(Triplet {
                anchor: anchor_text.as_str().to_string(),
                positive: texts[positives[i]].as_str().to_string(),
                negative: texts[negatives[i]].as_str().to_string(),
                scheme,
                anchor_key: anchor_key.clone(),
            });
        }
    }
    Ok(batch)
}

/// Merge triplet sets and drop exact duplicates.
///
/// Identity is the (anchor, positive, negative) string triple; the scheme
/// tag is deliberately excluded so the same texts sampled under both schemes
/// collapse to one example. First occurrence wins and input order is
/// otherwise preserved.
pub fn dedup_and_merge(sets: Vec<Vec<Triplet>>) -> Vec<Triplet> {
    let mut seen: std::collections::HashSet<(String, String, String)> =
        std::collections::HashSet::new();
    let mut merged = Vec::new();
    for set in sets {
        for triplet in set {
            let identity = (
                triplet.anchor.clone(),
                triplet.positive.clone(),
                triplet.negative.clone(),
            );
            if seen.insert(identity) {
                merged.push(triplet);
            }
        }
    }
    merged
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::OccupationRecord;

    fn record(term: &str, kldb: &str) -> OccupationRecord {
        OccupationRecord::from_raw_parts(term, kldb, "Meister", vec![], None).unwrap()
    }

    #[test]
    fn three_record_instance_pairs_the_only_options() {
        // Exhaustive check: with one positive and one negative candidate the
        // sampled triplet is forced.
        let records = vec![
            record("A", "32251"),
            record("B", "32252"),
            record("C", "83183"),
        ];
        let batch =
            build_triplets(&records, TripletScheme::Subgroup4Digit, 1, 7).unwrap();
        let anchor_a: Vec<_> = batch
            .triplets
            .iter()
            .filter(|t| t.anchor.contains(" A "))
            .collect();
        assert_eq!(anchor_a.len(), 1);
        assert!(anchor_a[0].positive.contains(" B "));
        assert!(anchor_a[0].negative.contains(" C "));
        // C has no bucket mate, so it is skipped.
        assert_eq!(batch.skipped_anchors, 1);
        assert_eq!(batch.triplets.len(), 2);
    }

    #[test]
    fn single_key_bucket_is_insufficient() {
        let records = vec![record("A", "32251"), record("B", "32252")];
        let err = build_triplets(&records, TripletScheme::Subgroup4Digit, 1, 7).unwrap_err();
        assert!(matches!(err, TripletError::InsufficientKeys(1)));
    }

    #[test]
    fn positives_exhaust_without_replacement() {
        let records = vec![
            record("A", "32251"),
            record("B", "32252"),
            record("C", "83183"),
            record("D", "83184"),
        ];
        let batch = build_triplets(&records, TripletScheme::Subgroup4Digit, 3, 7).unwrap();
        for anchor in ["A", "B", "C", "D"] {
            let count = batch
                .triplets
                .iter()
                .filter(|t| t.anchor.contains(&format!(" {anchor} ")))
                .count();
            assert_eq!(count, 1, "bucket size 2 supports exactly 1 triplet");
        }
    }

    #[test]
    fn requirement_scheme_keys_on_fifth_digit() {
        let records = vec![
            record("A", "32251"),
            record("B", "83181"),
            record("C", "83183"),
        ];
        let batch = build_triplets(&records, TripletScheme::RequirementDigit, 1, 7).unwrap();
        let anchor_a = batch
            .triplets
            .iter()
            .find(|t| t.anchor.contains(" A "))
            .unwrap();
        assert_eq!(anchor_a.anchor_key, "1");
        assert!(anchor_a.positive.contains(" B "));
        assert!(anchor_a.negative.contains(" C "));
    }

    #[test]
    fn same_seed_reproduces_byte_identical_output() {
        let records: Vec<_> = (0..30)
            .map(|i| {
                let sub = 3225 + (i % 5);
                record(&format!("T{i}"), &format!("{sub}{}", 1 + (i % 4)))
            })
            .collect();
        let a = build_triplets(&records, TripletScheme::Subgroup4Digit, 3, 99).unwrap();
        let b = build_triplets(&records, TripletScheme::Subgroup4Digit, 3, 99).unwrap();
        assert_eq!(a.triplets, b.triplets);
        let c = build_triplets(&records, TripletScheme::Subgroup4Digit, 3, 100).unwrap();
        assert_ne!(a.triplets, c.triplets);
    }

    #[test]
    fn dedup_drops_cross_scheme_duplicates() {
        let t = |scheme| Triplet {
            anchor: "a".into(),
            positive: "p".into(),
            negative: "n".into(),
            scheme,
            anchor_key: "k".into(),
        };
        let merged = dedup_and_merge(vec![
            vec![t(TripletScheme::Subgroup4Digit)],
            vec![t(TripletScheme::RequirementDigit)],
        ]);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].scheme, TripletScheme::Subgroup4Digit);
    }

    #[test]
    fn dedup_preserves_disjoint_sets() {
        let mk = |a: &str| Triplet {
            anchor: a.into(),
            positive: "p".into(),
            negative: "n".into(),
            scheme: TripletScheme::Subgroup4Digit,
            anchor_key: "k".into(),
        };
        let merged = dedup_and_merge(vec![
            vec![mk("a1"), mk("a2")],
            vec![mk("b1"), mk("b2"), mk("b3")],
        ]);
        assert_eq!(merged.len(), 5);
    }
}
