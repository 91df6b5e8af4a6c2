//! Constraint rule sets and typed rejection reasons.
//!
//! The rule sets mirror the schema's evolution from a seven-field puzzle to
//! hint-only payloads, and every failure carries a human-readable message
//! that retry prompts quote verbatim.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::parser::ParsedPuzzle;

/// The output schema the model is being asked to fill.
///
/// `field_count` is the number of independently malformable payload fields,
/// the `n` of the `(1-p)^n` well-formedness model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemaVariant {
    FullPuzzleDay1,
    CorePuzzleDay2,
    WordAndHintsDay3,
    HintsOnlyDay5,
}

impl SchemaVariant {
    pub fn field_count(self) -> usize {
        match self {
            SchemaVariant::FullPuzzleDay1 => 7,
            SchemaVariant::CorePuzzleDay2 => 5,
            SchemaVariant::WordAndHintsDay3 => 2,
            SchemaVariant::HintsOnlyDay5 => 1,
        }
    }

    /// Required hint count as (min, max); `None` max means unbounded.
    pub fn hint_bounds(self) -> (usize, Option<usize>) {
        match self {
            SchemaVariant::FullPuzzleDay1 => (5, Some(5)),
            SchemaVariant::CorePuzzleDay2 => (2, Some(5)),
            SchemaVariant::WordAndHintsDay3 | SchemaVariant::HintsOnlyDay5 => (3, None),
        }
    }

    /// Hint count a compliant response is expected to carry.
    pub fn expected_hint_count(self) -> usize {
        match self {
            SchemaVariant::FullPuzzleDay1 => 5,
            _ => 3,
        }
    }

    /// Whether the model itself produces the word.
    pub fn requires_word(self) -> bool {
        self != SchemaVariant::HintsOnlyDay5
    }

    pub fn requires_category(self) -> bool {
        matches!(
            self,
            SchemaVariant::FullPuzzleDay1 | SchemaVariant::CorePuzzleDay2
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemaVariant::FullPuzzleDay1 => "full_puzzle_day1",
            SchemaVariant::CorePuzzleDay2 => "core_puzzle_day2",
            SchemaVariant::WordAndHintsDay3 => "word_and_hints_day3",
            SchemaVariant::HintsOnlyDay5 => "hints_only_day5",
        }
    }
}

/// Constraint set evaluated against every parsed payload.
///
/// The charset rule is fixed: lowercase ASCII `a-z`, no accents. Exclusions
/// hold normalized words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationRuleSet {
    pub word_min_len: usize,
    pub word_max_len: usize,
    pub exclusion: BTreeSet<String>,
    pub schema: SchemaVariant,
}

impl ValidationRuleSet {
    /// Panics if `1 <= min <= max` does not hold; rule sets are constructed
    /// from validated configs.
    pub fn new(schema: SchemaVariant, word_min_len: usize, word_max_len: usize) -> Self {
        assert!(
            (1..=word_max_len).contains(&word_min_len),
            "word length bounds must satisfy 1 <= min <= max"
        );
        ValidationRuleSet {
            word_min_len,
            word_max_len,
            exclusion: BTreeSet::new(),
            schema,
        }
    }

    pub fn with_exclusions(mut self, exclusion: BTreeSet<String>) -> Self {
        self.exclusion = exclusion;
        self
    }
}

/// Discriminant of a validation failure, without its payload. Used for
/// tallies and for retry-feedback signalling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    WordLength,
    WordCharset,
    WordRepeated,
    HintCount,
    HintContainsWord,
    EmptyCategory,
    EmptyHint,
}

impl FailureKind {
    pub fn name(self) -> &'static str {
        match self {
            FailureKind::WordLength => "word_length",
            FailureKind::WordCharset => "word_charset",
            FailureKind::WordRepeated => "word_repeated",
            FailureKind::HintCount => "hint_count",
            FailureKind::HintContainsWord => "hint_contains_word",
            FailureKind::EmptyCategory => "empty_category",
            FailureKind::EmptyHint => "empty_hint",
        }
    }

    /// Whether the failure concerns the word itself (as opposed to hints or
    /// the category). Drives the retry prompt's closing instruction.
    pub fn is_word_failure(self) -> bool {
        matches!(
            self,
            FailureKind::WordLength | FailureKind::WordCharset | FailureKind::WordRepeated
        )
    }
}

/// Failure payload detail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureDetail {
    WordLength {
        actual: usize,
        min: usize,
        max: usize,
    },
    WordCharset {
        word: String,
    },
    WordRepeated {
        word: String,
    },
    HintCount {
        actual: usize,
        min: usize,
    },
    HintContainsWord {
        hint_index: usize,
    },
    EmptyCategory,
    EmptyHint,
}

impl FailureDetail {
    pub fn kind(&self) -> FailureKind {
        match self {
            FailureDetail::WordLength { .. } => FailureKind::WordLength,
            FailureDetail::WordCharset { .. } => FailureKind::WordCharset,
            FailureDetail::WordRepeated { .. } => FailureKind::WordRepeated,
            FailureDetail::HintCount { .. } => FailureKind::HintCount,
            FailureDetail::HintContainsWord { .. } => FailureKind::HintContainsWord,
            FailureDetail::EmptyCategory => FailureKind::EmptyCategory,
            FailureDetail::EmptyHint => FailureKind::EmptyHint,
        }
    }
}

/// Typed rejection reason. `message` is quoted verbatim in retry prompts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationFailure {
    pub detail: FailureDetail,
    pub message: String,
}

impl ValidationFailure {
    pub fn kind(&self) -> FailureKind {
        self.detail.kind()
    }

    fn new(detail: FailureDetail, message: String) -> Self {
        ValidationFailure { detail, message }
    }
}

/// Lowercases, trims, and folds common Latin diacritics to ASCII.
pub fn normalize_word(word: &str) -> String {
    word.trim()
        .chars()
        .flat_map(char::to_lowercase)
        .map(fold_diacritic)
        .collect()
}

// Latin-1 Supplement and Latin Extended-A fold table (lowercase inputs).
fn fold_diacritic(c: char) -> char {
    match c {
        'à' | 'á' | 'â' | 'ã' | 'ä' | 'å' | 'ā' | 'ă' | 'ą' => 'a',
        'è' | 'é' | 'ê' | 'ë' | 'ē' | 'ĕ' | 'ė' | 'ę' | 'ě' => 'e',
        'ì' | 'í' | 'î' | 'ï' | 'ĩ' | 'ī' | 'ĭ' | 'į' | 'ı' => 'i',
        'ò' | 'ó' | 'ô' | 'õ' | 'ö' | 'ø' | 'ō' | 'ŏ' | 'ő' => 'o',
        'ù' | 'ú' | 'û' | 'ü' | 'ũ' | 'ū' | 'ŭ' | 'ů' | 'ű' | 'ų' => 'u',
        'ç' | 'ć' | 'ĉ' | 'ċ' | 'č' => 'c',
        'ñ' | 'ń' | 'ņ' | 'ň' => 'n',
        'ý' | 'ÿ' => 'y',
        'ś' | 'ŝ' | 'ş' | 'š' => 's',
        'ź' | 'ż' | 'ž' => 'z',
        'ĝ' | 'ğ' | 'ġ' | 'ģ' => 'g',
        'ĺ' | 'ļ' | 'ľ' | 'ł' => 'l',
        'ŕ' | 'ŗ' | 'ř' => 'r',
        'ţ' | 'ť' => 't',
        'ď' => 'd',
        _ => c,
    }
}

/// True iff the normalized form of `word` is in `exclusion`.
pub fn is_repeat(word: &str, exclusion: &BTreeSet<String>) -> bool {
    exclusion.contains(&normalize_word(word))
}

fn is_ascii_lower_alpha(word: &str) -> bool {
    !word.is_empty() && word.chars().all(|c| c.is_ascii_lowercase())
}

/// Evaluates every rule applicable to the schema variant and collects all
/// failures (never fail-fast), in a fixed rule-declaration order:
/// word length, word charset, word repetition, hint count, hint-contains-word,
/// category presence, empty hints.
///
/// For [`SchemaVariant::HintsOnlyDay5`] the word is externally supplied and
/// trusted: no word or category rules run, but hint-contains-word is still
/// checked against the supplied word.
pub fn validate(puzzle: &ParsedPuzzle, rules: &ValidationRuleSet) -> Vec<ValidationFailure> {
    let mut failures = Vec::new();
    let word_rules_apply = rules.schema.requires_word();

    if word_rules_apply {
        let raw_word = puzzle.word.as_deref().unwrap_or("").trim();
        let len = raw_word.chars().count();
        if len < rules.word_min_len || len > rules.word_max_len {
            let message = if rules.word_min_len == rules.word_max_len {
                format!(
                    "word has {} letters but we asked for {}",
                    len, rules.word_min_len
                )
            } else {
                format!(
                    "word has {} letters but we asked for {}-{}",
                    len, rules.word_min_len, rules.word_max_len
                )
            };
            failures.push(ValidationFailure::new(
                FailureDetail::WordLength {
                    actual: len,
                    min: rules.word_min_len,
                    max: rules.word_max_len,
                },
                message,
            ));
        }
        if !is_ascii_lower_alpha(raw_word) {
            failures.push(ValidationFailure::new(
                FailureDetail::WordCharset {
                    word: raw_word.to_string(),
                },
                format!("word \"{raw_word}\" must use only lowercase letters a-z with no accents"),
            ));
        }
        if is_repeat(raw_word, &rules.exclusion) {
            failures.push(ValidationFailure::new(
                FailureDetail::WordRepeated {
                    word: normalize_word(raw_word),
                },
                format!("word \"{raw_word}\" was already used or rejected"),
            ));
        }
    }

    let (min_hints, max_hints) = rules.schema.hint_bounds();
    let hint_count = puzzle.hints.len();
    if hint_count < min_hints || max_hints.is_some_and(|max| hint_count > max) {
        let expected = match max_hints {
            Some(max) if max == min_hints => format!("exactly {min_hints}"),
            Some(max) => format!("{min_hints}-{max}"),
            None => format!("at least {min_hints}"),
        };
        failures.push(ValidationFailure::new(
            FailureDetail::HintCount {
                actual: hint_count,
                min: min_hints,
            },
            format!("got {hint_count} hints but {expected} are required"),
        ));
    }

    // The word to screen hints against: the payload word for model-generated
    // schemas, the externally supplied word for hint-only mode.
    if let Some(word) = puzzle.word.as_deref() {
        let normalized_word = normalize_word(word);
        if !normalized_word.is_empty() {
            for (index, hint) in puzzle.hints.iter().enumerate() {
                if normalize_word(hint).contains(&normalized_word) {
                    failures.push(ValidationFailure::new(
                        FailureDetail::HintContainsWord { hint_index: index },
                        format!("hint {} contains the word \"{}\"", index + 1, word.trim()),
                    ));
                }
            }
        }
    }

    if word_rules_apply && rules.schema.requires_category() {
        let empty = puzzle
            .category
            .as_deref()
            .is_none_or(|c| c.trim().is_empty());
        if empty {
            failures.push(ValidationFailure::new(
                FailureDetail::EmptyCategory,
                "category must be a non-empty string".to_string(),
            ));
        }
    }

    if puzzle.hints.iter().any(|h| h.trim().is_empty()) {
        failures.push(ValidationFailure::new(
            FailureDetail::EmptyHint,
            "hints must not be empty".to_string(),
        ));
    }

    failures
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn puzzle(word: &str, hints: &[&str]) -> ParsedPuzzle {
        ParsedPuzzle {
            word: Some(word.to_string()),
            hints: hints.iter().map(|h| h.to_string()).collect(),
            category: Some("things".to_string()),
            difficulty: None,
        }
    }

    #[test]
    fn normalize_lowercases_and_trims() {
        assert_eq!(normalize_word("Gato "), "gato");
        assert_eq!(normalize_word("sol"), "sol");
    }

    #[test]
    fn normalize_folds_diacritics() {
        // Pinned against a Unicode NFD + mark-strip reference.
        assert_eq!(normalize_word("maçã"), "maca");
        assert_eq!(normalize_word("ção"), "cao");
        assert_eq!(normalize_word("niño"), "nino");
        assert_eq!(normalize_word("café"), "cafe");
    }

    #[test]
    fn word_length_violation_embeds_counts() {
        let rules = ValidationRuleSet::new(SchemaVariant::WordAndHintsDay3, 5, 5);
        let failures = validate(&puzzle("ventana", &["a", "b", "c"]), &rules);
        assert_eq!(failures.len(), 1);
        assert_eq!(
            failures[0].detail,
            FailureDetail::WordLength {
                actual: 7,
                min: 5,
                max: 5
            }
        );
        assert!(failures[0].message.contains('7'));
        assert!(failures[0].message.contains('5'));
    }

    #[test]
    fn hint_containing_word_is_flagged() {
        let rules = ValidationRuleSet::new(SchemaVariant::WordAndHintsDay3, 4, 4);
        let failures = validate(
            &puzzle("gato", &["A gato is a common pet", "It purrs", "It naps"]),
            &rules,
        );
        assert_eq!(failures.len(), 1);
        assert_eq!(
            failures[0].detail,
            FailureDetail::HintContainsWord { hint_index: 0 }
        );
    }

    #[test]
    fn valid_day3_puzzle_passes() {
        let rules = ValidationRuleSet::new(SchemaVariant::WordAndHintsDay3, 6, 6);
        let failures = validate(
            &puzzle(
                "estufa",
                &["Aquece a casa", "Fica na cozinha", "Usa energia"],
            ),
            &rules,
        );
        assert!(failures.is_empty(), "{failures:?}");
    }

    #[test]
    fn repeat_detection_uses_normalization() {
        let mut exclusion = BTreeSet::new();
        exclusion.insert("gato".to_string());
        assert!(is_repeat("Gato", &exclusion));
        assert!(!is_repeat("sol", &BTreeSet::new()));

        let mut folded = BTreeSet::new();
        folded.insert("maca".to_string());
        assert!(is_repeat("maçã", &folded));
    }

    #[test]
    fn contains_check_folds_case_and_diacritics() {
        let rules = ValidationRuleSet::new(SchemaVariant::WordAndHintsDay3, 4, 4);
        let failures = validate(
            &puzzle("maca", &["Uma MAÇÃ por dia", "Outra dica", "Mais uma"]),
            &rules,
        );
        assert!(failures
            .iter()
            .any(|f| f.kind() == FailureKind::HintContainsWord));
    }

    #[test]
    fn all_failures_collected_in_declaration_order() {
        let mut rules = ValidationRuleSet::new(SchemaVariant::FullPuzzleDay1, 4, 4);
        rules.exclusion.insert("maca".to_string());
        let bad = ParsedPuzzle {
            word: Some("Maçã".to_string()),
            hints: vec!["so uma dica com Maçã".to_string(), "  ".to_string()],
            category: None,
            difficulty: None,
        };
        let kinds: Vec<FailureKind> = validate(&bad, &rules).iter().map(|f| f.kind()).collect();
        assert_eq!(
            kinds,
            vec![
                FailureKind::WordCharset,
                FailureKind::WordRepeated,
                FailureKind::HintCount,
                FailureKind::HintContainsWord,
                FailureKind::EmptyCategory,
                FailureKind::EmptyHint,
            ]
        );
    }

    #[test]
    fn day1_requires_exactly_five_hints() {
        let rules = ValidationRuleSet::new(SchemaVariant::FullPuzzleDay1, 4, 4);
        let failures = validate(&puzzle("gato", &["a", "b", "c"]), &rules);
        assert!(failures.iter().any(|f| f.kind() == FailureKind::HintCount));
        let failures = validate(&puzzle("gato", &["a", "b", "c", "d", "e"]), &rules);
        assert!(failures.is_empty());
    }

    #[test]
    fn day2_allows_two_to_five_hints() {
        let rules = ValidationRuleSet::new(SchemaVariant::CorePuzzleDay2, 4, 4);
        assert!(validate(&puzzle("gato", &["a", "b"]), &rules).is_empty());
        assert!(!validate(&puzzle("gato", &["a"]), &rules).is_empty());
        assert!(!validate(&puzzle("gato", &["a", "b", "c", "d", "e", "f"]), &rules).is_empty());
    }

    #[test]
    fn hints_only_skips_word_and_category_rules() {
        let rules = ValidationRuleSet::new(SchemaVariant::HintsOnlyDay5, 4, 4)
            .with_exclusions([normalize_word("sol")].into_iter().collect());
        // Word is supplied and excluded, length is out of range, category is
        // missing: none of that matters for hint-only validation.
        let p = ParsedPuzzle {
            word: Some("sol".to_string()),
            hints: vec!["dica um".into(), "dica dois".into(), "dica tres".into()],
            category: None,
            difficulty: None,
        };
        assert!(validate(&p, &rules).is_empty());
    }

    #[test]
    fn hints_only_still_checks_hint_rules() {
        let rules = ValidationRuleSet::new(SchemaVariant::HintsOnlyDay5, 4, 4);
        let p = ParsedPuzzle {
            word: Some("gato".to_string()),
            hints: vec!["o gato mia".into(), "dica".into(), "outra".into()],
            category: None,
            difficulty: None,
        };
        let kinds: Vec<FailureKind> = validate(&p, &rules).iter().map(|f| f.kind()).collect();
        assert_eq!(kinds, vec![FailureKind::HintContainsWord]);
    }

    proptest! {
        #[test]
        fn validate_is_deterministic(word in "\\PC{0,12}", hint in "\\PC{0,20}") {
            let rules = ValidationRuleSet::new(SchemaVariant::WordAndHintsDay3, 4, 6);
            let p = ParsedPuzzle {
                word: Some(word),
                hints: vec![hint.clone(), hint, "x".into()],
                category: None,
                difficulty: None,
            };
            let a = validate(&p, &rules);
            let b = validate(&p, &rules);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn hints_only_never_emits_word_failures(word in "\\PC{0,12}", hints in proptest::collection::vec("\\PC{0,20}", 0..6)) {
            let rules = ValidationRuleSet::new(SchemaVariant::HintsOnlyDay5, 4, 4);
            let p = ParsedPuzzle { word: Some(word), hints, category: None, difficulty: None };
            for f in validate(&p, &rules) {
                prop_assert!(!matches!(
                    f.kind(),
                    FailureKind::WordLength
                        | FailureKind::WordCharset
                        | FailureKind::WordRepeated
                        | FailureKind::EmptyCategory
                ));
            }
        }

        #[test]
        fn messages_are_never_empty(word in "\\PC{0,12}") {
            let rules = ValidationRuleSet::new(SchemaVariant::FullPuzzleDay1, 5, 5);
            let p = ParsedPuzzle { word: Some(word), hints: vec![], category: None, difficulty: None };
            for f in validate(&p, &rules) {
                prop_assert!(!f.message.is_empty());
            }
        }

        #[test]
        fn normalize_is_idempotent(s in "\\PC{0,24}") {
            let once = normalize_word(&s);
            prop_assert_eq!(normalize_word(&once), once.clone());
        }
    }
}
