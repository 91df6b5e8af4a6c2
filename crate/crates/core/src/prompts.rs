//! Prompt templates across the four rewrite generations, plus retry-feedback
//! and fallback construction.
//!
//! The rewrites preserve the lessons each one encoded: explicit format rules,
//! priority markers before hard constraints, concrete rejection examples, and
//! full language names instead of ISO codes. Day-5 prompts state the target
//! language in three separate positions.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::validator::{FailureDetail, ValidationFailure, ValidationRuleSet};

/// Languages with shipped display names. Unknown codes are rejected.
const LANGUAGE_NAMES: [(&str, &str); 3] = [
    ("pt", "Brazilian Portuguese"),
    ("en", "English"),
    ("es", "Spanish"),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown language code \"{0}\"")]
pub struct UnknownLanguage(pub String);

/// Resolves a short language code to its full display name.
pub fn language_name(code: &str) -> Result<&'static str, UnknownLanguage> {
    LANGUAGE_NAMES
        .iter()
        .find(|(c, _)| *c == code)
        .map(|(_, name)| *name)
        .ok_or_else(|| UnknownLanguage(code.to_string()))
}

/// A language code paired with its resolved display name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageSpec {
    code: String,
    display_name: String,
}

impl LanguageSpec {
    pub fn new(code: &str) -> Result<Self, UnknownLanguage> {
        let display_name = language_name(code)?.to_string();
        Ok(LanguageSpec {
            code: code.to_string(),
            display_name,
        })
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    pub fn display_name(&self) -> &str {
        &self.display_name
    }
}

/// Which rewrite generation a prompt pair belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewriteGeneration {
    Day1,
    Day2,
    Day3Hardened,
    Day4LanguageNames,
    Day5HintOnly,
}

impl fmt::Display for RewriteGeneration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RewriteGeneration::Day1 => "day1",
            RewriteGeneration::Day2 => "day2",
            RewriteGeneration::Day3Hardened => "day3_hardened",
            RewriteGeneration::Day4LanguageNames => "day4_language_names",
            RewriteGeneration::Day5HintOnly => "day5_hint_only",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptPair {
    pub system: String,
    pub user: String,
    pub rewrite_generation: RewriteGeneration,
}

/// `Day4LanguageNames` and later interpolate the display name; earlier
/// rewrites used the bare code.
fn language_token(lang: &LanguageSpec, generation: RewriteGeneration) -> &str {
    if generation >= RewriteGeneration::Day4LanguageNames {
        lang.display_name()
    } else {
        lang.code()
    }
}

fn schema_shape(rules: &ValidationRuleSet) -> &'static str {
    use crate::validator::SchemaVariant::*;
    match rules.schema {
        FullPuzzleDay1 => {
            "{\"word\": \"string\", \"category\": \"string\", \"difficulty\": number, \"hints\": [...]}"
        }
        CorePuzzleDay2 => {
            "{\"word\": \"...\", \"category\": \"...\", \"difficulty\": N, \"hints\": [\"h1\",\"h2\",\"h3\"]}"
        }
        WordAndHintsDay3 => "{\"word\": \"...\", \"hints\": [\"h1\",\"h2\",\"h3\"]}",
        HintsOnlyDay5 => "{\"hints\": [\"hint1\", \"hint2\", \"hint3\"]}",
    }
}

fn english_key_list(rules: &ValidationRuleSet) -> String {
    let mut keys = vec!["\"word\""];
    if rules.schema.requires_category() {
        keys.push("\"category\"");
        keys.push("\"difficulty\"");
    }
    keys.push("\"hints\"");
    keys.join(", ")
}

/// Renders `Do NOT use any of these words: ...` from a deduplicated,
/// normalized word list. Empty input renders no clause.
pub fn exclusion_clause(exclusions: &[String]) -> Option<String> {
    let set: BTreeSet<String> = exclusions
        .iter()
        .map(|w| crate::validator::normalize_word(w))
        .filter(|w| !w.is_empty())
        .collect();
    if set.is_empty() {
        return None;
    }
    let list: Vec<String> = set.into_iter().collect();
    Some(format!(
        "Do NOT use any of these words: {}.",
        list.join(", ")
    ))
}

fn push_exclusions(user: &mut String, exclusions: &[String]) {
    if let Some(clause) = exclusion_clause(exclusions) {
        user.push('\n');
        user.push_str(&clause);
    }
}

/// Builds the system/user pair for a puzzle-generation request in the given
/// rewrite generation. Not valid for `Day5HintOnly`; hint-only requests use
/// [`build_hint_prompt`].
pub fn build_puzzle_prompt(
    rules: &ValidationRuleSet,
    lang: &LanguageSpec,
    exclusions: &[String],
    generation: RewriteGeneration,
) -> PromptPair {
    assert!(
        generation != RewriteGeneration::Day5HintOnly,
        "hint-only prompts are built by build_hint_prompt"
    );
    let lang_token = language_token(lang, generation);
    let min = rules.word_min_len;
    let max = rules.word_max_len;
    let hint_count = rules.schema.expected_hint_count();

    let (system, mut user) = match generation {
        RewriteGeneration::Day1 => {
            // Historical variant: the broken function-calling reference is
            // preserved for experiments demonstrating its failure.
            let system = "You are a word generator for a guessing game.\n\
                 Always respond using the provided function.\n\
                 Never add text outside the function call."
                .to_string();
            let user = format!(
                "Return ONLY valid JSON, no extra text.\n\
                 Schema: {}\n\
                 Rules:\n\
                 - The word MUST be a common noun in {}, {}-{} letters\n\
                 - No proper nouns, no accents, lowercase only\n\
                 - {} progressive hints: from vaguest to most specific\n\
                 - Hints MUST NOT contain the word",
                schema_shape(rules),
                lang_token,
                min,
                max,
                hint_count,
            );
            (system, user)
        }
        RewriteGeneration::Day2 => {
            let system = format!(
                "You are a word generator for a game.\n\
                 Always respond with ONLY a JSON object.\n\
                 No markdown, no code fences, no explanation.\n\
                 The JSON keys MUST be in English: {}.\n\
                 The values for word, category, and hints must be in the requested language.\n\
                 CRITICAL: The word MUST have exactly {} to {} letters.\n\
                 Count the letters carefully.\n\
                 Words with fewer or more letters will be rejected.",
                english_key_list(rules),
                min,
                max,
            );
            let user = format!(
                "Generate one puzzle now with {} hints.\n\
                 Output language for values: {}\n\
                 Schema: {}",
                hint_count,
                lang_token,
                schema_shape(rules),
            );
            (system, user)
        }
        RewriteGeneration::Day3Hardened | RewriteGeneration::Day4LanguageNames => {
            let mut system = format!(
                "You are a word generator for a game.\n\
                 Always respond with ONLY a JSON object.\n\
                 No markdown, no code fences, no explanation.\n\
                 The JSON keys MUST be in English: {}.\n\
                 The values for word and hints must be in the requested language.\n\
                 CRITICAL RULE 1: Word length.\n\
                 The word MUST have {} to {} letters.\n\
                 Count every letter before answering.\n\
                 A word like \"estufa\" has 6 letters and would be REJECTED.\n\
                 CRITICAL RULE 2: Hints.\n\
                 NEVER include the word itself inside any hint.",
                english_key_list(rules),
                min,
                max,
            );
            if generation == RewriteGeneration::Day4LanguageNames {
                system.push_str(&format!(
                    "\nThe word MUST be a common noun in {lang_token}."
                ));
            }
            let user = format!(
                "Generate one puzzle now with {} hints.\n\
                 Output language for values: {}\n\
                 Schema: {}",
                hint_count,
                lang_token,
                schema_shape(rules),
            );
            (system, user)
        }
        RewriteGeneration::Day5HintOnly => unreachable!(),
    };

    push_exclusions(&mut user, exclusions);
    PromptPair {
        system,
        user,
        rewrite_generation: generation,
    }
}

/// The word-independent system half of the hint-only prompt, reused across
/// every request in a session.
pub fn hint_system_prompt(lang: &LanguageSpec) -> String {
    let name = lang.display_name();
    format!(
        "You write short, clear word-game hints in {name}.\n\
         Rules:\n\
         - ALL hints MUST be written in {name}. Never write hints in English or any other language.\n\
         - Do NOT include the word in any hint.\n\
         - Each hint should be one short sentence.\n\
         - Return ONLY a JSON object: {{\"hints\": [\"hint1\", \"hint2\", \"hint3\"]}}"
    )
}

/// Builds the final hint-only prompt pair for a supplied word. The target
/// language is stated in the system header, the system rules, and the user
/// instruction.
pub fn build_hint_prompt(word: &str, lang: &LanguageSpec) -> PromptPair {
    assert!(!word.trim().is_empty(), "hint prompts require a word");
    let name = lang.display_name();
    let user = format!(
        "Write 3 hints for this word IN {name}.\n\
         Do NOT write hints in English unless the language is English.\n\
         Word: \"{word}\""
    );
    PromptPair {
        system: hint_system_prompt(lang),
        user,
        rewrite_generation: RewriteGeneration::Day5HintOnly,
    }
}

fn restatement(failure: &ValidationFailure, rules: &ValidationRuleSet) -> String {
    match &failure.detail {
        FailureDetail::WordLength { .. } => format!(
            "The word MUST have {}-{} letters.",
            rules.word_min_len, rules.word_max_len
        ),
        FailureDetail::WordCharset { .. } => {
            "Use only lowercase letters a-z, with no accents.".to_string()
        }
        FailureDetail::WordRepeated { .. } => "That word was already used.".to_string(),
        FailureDetail::HintCount { min, .. } => {
            format!("Return at least {min} hints.")
        }
        FailureDetail::HintContainsWord { .. } => {
            "NEVER include the word itself inside any hint.".to_string()
        }
        FailureDetail::EmptyCategory => "Provide a non-empty category.".to_string(),
        FailureDetail::EmptyHint => "Every hint must be a non-empty sentence.".to_string(),
    }
}

/// Builds the contextual-retry user prompt for a concrete rejection.
pub fn build_retry_prompt(failure: &ValidationFailure, rules: &ValidationRuleSet) -> String {
    let closing = if failure.kind().is_word_failure() {
        "Try again with a DIFFERENT word."
    } else {
        "Try again with DIFFERENT hints."
    };
    format!(
        "Your previous response was rejected: {}.\n{}\n{}",
        failure.message,
        restatement(failure, rules),
        closing,
    )
}

/// Generic retry used when the previous response could not be parsed at all,
/// so there is no typed failure to quote.
pub fn build_invalid_response_prompt(rules: &ValidationRuleSet) -> String {
    format!(
        "Your previous response was invalid.\n\
         Respond with ONLY a JSON object, no markdown, no explanation.\n\
         Schema: {}",
        schema_shape(rules),
    )
}

/// Reduced third-attempt prompt: only the word-length and hint-count rules
/// survive.
pub fn build_simplified_prompt(rules: &ValidationRuleSet, lang: &LanguageSpec) -> PromptPair {
    let name = lang.display_name();
    let hint_count = rules.schema.expected_hint_count();
    let system = format!(
        "You generate puzzle words. Return ONLY a JSON object: {}",
        schema_shape(rules),
    );
    let user = format!(
        "Give one common noun in {} with {} to {} letters, and {} short hints in {}.",
        name, rules.word_min_len, rules.word_max_len, hint_count, name,
    );
    PromptPair {
        system,
        user,
        rewrite_generation: RewriteGeneration::Day3Hardened,
    }
}
