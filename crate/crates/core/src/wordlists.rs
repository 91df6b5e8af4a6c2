//! Curated word-list loading, validation, and no-repeat selection.
//!
//! Word lists are the deterministic half of the final task split: the list
//! supplies the word, the model only writes hints about it. Lists ship as
//! JSON assets (`{"language": "pt", "words": [...]}`); adding a language is
//! a data change, not a code change.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::validator::normalize_word;

/// On-disk schema of a word-list asset.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct WordListFile {
    language: String,
    words: Vec<String>,
}

/// An in-memory word list bucketed by word length.
///
/// Loading lowercases and trims entries but deliberately keeps accented
/// characters so that validation can flag them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordList {
    pub language: String,
    pub words_by_length: BTreeMap<usize, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordListError {
    #[error("word list is not valid UTF-8")]
    Encoding,
    #[error("malformed word list document: {0}")]
    Format(String),
}

/// A validation finding over a loaded list. All findings are collected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ListViolation {
    Duplicate {
        word: String,
    },
    BelowMinimum {
        length: usize,
        actual: usize,
        required: usize,
    },
    BadCharset {
        word: String,
    },
}

impl std::fmt::Display for ListViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ListViolation::Duplicate { word } => write!(f, "duplicate word \"{word}\""),
            ListViolation::BelowMinimum {
                length,
                actual,
                required,
            } => write!(
                f,
                "length {length} has {actual} words but at least {required} are required"
            ),
            ListViolation::BadCharset { word } => {
                write!(f, "word \"{word}\" contains characters outside a-z")
            }
        }
    }
}

/// Word picked from a bucket, with how many unexcluded candidates remain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSelection {
    pub word: String,
    pub length: usize,
    pub remaining_in_bucket: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no unexcluded words of length {length} remain")]
pub struct Exhausted {
    pub length: usize,
}

/// Parses a word-list asset and builds length buckets.
pub fn load_word_list(bytes: &[u8]) -> Result<WordList, WordListError> {
    let text = std::str::from_utf8(bytes).map_err(|_| WordListError::Encoding)?;
    let file: WordListFile =
        serde_json::from_str(text).map_err(|e| WordListError::Format(e.to_string()))?;

    let mut words_by_length: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for word in file.words {
        let word = word.trim().to_lowercase();
        if word.is_empty() {
            continue;
        }
        let length = word.chars().count();
        words_by_length.entry(length).or_default().push(word);
    }
    Ok(WordList {
        language: file.language,
        words_by_length,
    })
}

/// Serializes back to the on-disk schema. Round-trips with
/// [`load_word_list`] for valid lists.
pub fn serialize_word_list(list: &WordList) -> String {
    let words: Vec<String> = list
        .words_by_length
        .values()
        .flat_map(|bucket| bucket.iter().cloned())
        .collect();
    let file = WordListFile {
        language: list.language.clone(),
        words,
    };
    serde_json::to_string_pretty(&file).expect("word list serialization cannot fail")
}

/// Runs the CI checks: duplicates (after normalization), per-length minimum
/// counts, and charset. Violations are data, not errors.
pub fn validate_word_list(
    list: &WordList,
    min_per_length: &BTreeMap<usize, usize>,
) -> Vec<ListViolation> {
    let mut violations = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();

    for bucket in list.words_by_length.values() {
        for word in bucket {
            if !word.chars().all(|c| c.is_ascii_lowercase()) {
                violations.push(ListViolation::BadCharset { word: word.clone() });
            }
            if !seen.insert(normalize_word(word)) {
                violations.push(ListViolation::Duplicate { word: word.clone() });
            }
        }
    }

    for (&length, &required) in min_per_length {
        let actual = list.words_by_length.get(&length).map_or(0, Vec::len);
        if actual < required {
            violations.push(ListViolation::BelowMinimum {
                length,
                actual,
                required,
            });
        }
    }

    violations
}

/// Default per-length minimum for desk-scale lists.
pub const DEFAULT_MIN_PER_LENGTH: usize = 10;

/// Uniform draw from the length bucket minus `exclusions` (normalized
/// forms). Deterministic given the RNG state.
pub fn select_word<R: Rng>(
    list: &WordList,
    length: usize,
    exclusions: &BTreeSet<String>,
    rng: &mut R,
) -> Result<WordSelection, Exhausted> {
    let bucket = list
        .words_by_length
        .get(&length)
        .ok_or(Exhausted { length })?;
    let candidates: Vec<&String> = bucket
        .iter()
        .filter(|w| !exclusions.contains(&normalize_word(w)))
        .collect();
    if candidates.is_empty() {
        return Err(Exhausted { length });
    }
    let word = candidates[rng.gen_range(0..candidates.len())].clone();
    Ok(WordSelection {
        word,
        length,
        remaining_in_bucket: candidates.len() - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn minimal_list() -> WordList {
        load_word_list(br#"{"language": "pt", "words": ["gato", "casa", "sol"]}"#).unwrap()
    }

    #[test]
    fn load_buckets_by_length() {
        let list = minimal_list();
        assert_eq!(list.language, "pt");
        assert_eq!(list.words_by_length[&4], vec!["gato", "casa"]);
        assert_eq!(list.words_by_length[&3], vec!["sol"]);
    }

    #[test]
    fn load_rejects_invalid_encoding() {
        assert_eq!(
            load_word_list(&[0xff, 0xfe, 0x00]),
            Err(WordListError::Encoding)
        );
    }

    #[test]
    fn load_rejects_wrong_shape() {
        assert!(matches!(
            load_word_list(br#"["gato"]"#),
            Err(WordListError::Format(_))
        ));
        assert!(matches!(
            load_word_list(br#"{"language": "pt", "words": [1, 2]}"#),
            Err(WordListError::Format(_))
        ));
    }

    #[test]
    fn empty_words_load_fine() {
        let list = load_word_list(br#"{"language": "pt", "words": []}"#).unwrap();
        assert!(list.words_by_length.is_empty());
    }

    #[test]
    fn validation_flags_duplicates() {
        let list =
            load_word_list(br#"{"language": "pt", "words": ["casa", "gato", "casa"]}"#).unwrap();
        let violations = validate_word_list(&list, &BTreeMap::new());
        assert_eq!(
            violations,
            vec![ListViolation::Duplicate {
                word: "casa".to_string()
            }]
        );
    }

    #[test]
    fn validation_flags_below_minimum() {
        let list = load_word_list(br#"{"language": "pt", "words": ["gato", "casa"]}"#).unwrap();
        let mins = BTreeMap::from([(4, 5)]);
        assert_eq!(
            validate_word_list(&list, &mins),
            vec![ListViolation::BelowMinimum {
                length: 4,
                actual: 2,
                required: 5
            }]
        );
    }

    #[test]
    fn validation_flags_bad_charset() {
        let list = load_word_list(r#"{"language": "pt", "words": ["maçã"]}"#.as_bytes()).unwrap();
        let violations = validate_word_list(&list, &BTreeMap::new());
        assert_eq!(
            violations,
            vec![ListViolation::BadCharset {
                word: "maçã".to_string()
            }]
        );
    }

    #[test]
    fn selection_respects_exclusions() {
        let list = minimal_list();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sel = select_word(&list, 4, &BTreeSet::new(), &mut rng).unwrap();
        assert_eq!(sel.length, 4);
        assert_eq!(sel.remaining_in_bucket, 1);

        let single = load_word_list(br#"{"language": "pt", "words": ["gato"]}"#).unwrap();
        let sel = select_word(&single, 4, &BTreeSet::new(), &mut rng).unwrap();
        assert_eq!(sel.word, "gato");
        let excl: BTreeSet<String> = ["gato".to_string()].into_iter().collect();
        assert_eq!(
            select_word(&single, 4, &excl, &mut rng),
            Err(Exhausted { length: 4 })
        );
    }

    #[test]
    fn selection_is_deterministic_per_seed() {
        let list = load_word_list(
            br#"{"language": "en", "words": ["door", "fish", "bird", "milk", "rain", "shoe", "tree", "book", "lamp", "star"]}"#,
        )
        .unwrap();
        let pick = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            select_word(&list, 4, &BTreeSet::new(), &mut rng)
                .unwrap()
                .word
        };
        assert_eq!(pick(7), pick(7));
    }

    #[test]
    fn fourth_language_loads_without_code_changes() {
        // Same loader, same validator; only the data file differs.
        let bytes = include_bytes!("../../../wordlists/words_it.json");
        let list = load_word_list(bytes).unwrap();
        assert_eq!(list.language, "it");
        let mins = BTreeMap::from([
            (4, DEFAULT_MIN_PER_LENGTH),
            (5, DEFAULT_MIN_PER_LENGTH),
            (6, DEFAULT_MIN_PER_LENGTH),
        ]);
        assert!(validate_word_list(&list, &mins).is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(select_word(&list, 5, &BTreeSet::new(), &mut rng).is_ok());
    }

    proptest! {
        #[test]
        fn selection_never_returns_excluded(

            seed in 0u64..1000,
            excluded in proptest::collection::btree_set("[a-z]{4}", 0..4),
        ) {
            let list = load_word_list(
                br#"{"language": "en", "words": ["door", "fish", "bird", "milk", "rain"]}"#,
            ).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            if let Ok(sel) = select_word(&list, 4, &excluded, &mut rng) {
                prop_assert!(!excluded.contains(&sel.word));
            }
        }

        #[test]
        fn load_serialize_round_trip(
            words in proptest::collection::btree_set("[a-z]{3,7}", 1..20),
        ) {
            let file = serde_json::json!({
                "language": "en",
                "words": words.iter().cloned().collect::<Vec<String>>(),
            });
            let list = load_word_list(file.to_string().as_bytes()).unwrap();
            let reloaded = load_word_list(serialize_word_list(&list).as_bytes()).unwrap();
            prop_assert_eq!(list, reloaded);
        }
    }
}
