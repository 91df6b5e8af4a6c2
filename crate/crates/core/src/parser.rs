//! Multi-layer defensive parsing for messy model output.
//!
//! Small models wrap JSON in markdown fences, translate keys into the output
//! language, embed objects in prose, emit replacement characters, or skip
//! JSON entirely. Each layer of this pipeline catches a case the previous
//! one missed:
//!
//! 1. replacement-character sanitization
//! 2. code fence stripping
//! 3. direct decode against the expected schema
//! 4. regex extraction of the first embedded object
//! 5. structural parsing (fields inferred by value shape, not key name)
//!
//! Hint-only schemas additionally try a multi-language hint-key search and
//! the pipe-delimited / numbered-list plain-text formats.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::engine::RawModelOutput;
use crate::validator::SchemaVariant;

const REPLACEMENT_CHAR: char = '\u{FFFD}';

/// Hint keys the model may emit instead of the canonical `hints`.
pub const HINT_KEYS: [&str; 6] = ["hints", "dicas", "pistas", "clues", "indices", "consejos"];

/// Structured payload recovered from model text. Fields the pipeline could
/// not assign stay `None`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedPuzzle {
    pub word: Option<String>,
    pub hints: Vec<String>,
    pub category: Option<String>,
    pub difficulty: Option<i64>,
}

/// Which pipeline layer produced the payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseStrategy {
    DirectDecode,
    FenceStripped,
    RegexExtracted,
    Structural,
    HintKeySearch,
    PipeDelimited,
    NumberedList,
}

impl ParseStrategy {
    pub fn name(self) -> &'static str {
        match self {
            ParseStrategy::DirectDecode => "direct_decode",
            ParseStrategy::FenceStripped => "fence_stripped",
            ParseStrategy::RegexExtracted => "regex_extracted",
            ParseStrategy::Structural => "structural",
            ParseStrategy::HintKeySearch => "hint_key_search",
            ParseStrategy::PipeDelimited => "pipe_delimited",
            ParseStrategy::NumberedList => "numbered_list",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseOutcome {
    pub payload: ParsedPuzzle,
    pub strategy: ParseStrategy,
    /// True if removing U+FFFD characters changed the text.
    pub sanitized: bool,
}

/// One attempted layer and why it declined, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerOutcome {
    pub layer: String,
    pub detail: String,
}

/// Every layer declined. Carries the ordered per-layer outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no parse strategy succeeded ({} layers tried)", layers.len())]
pub struct ParseFailure {
    pub layers: Vec<LayerOutcome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeFailure {
    #[error("not a JSON object: {0}")]
    NotAnObject(String),
    #[error("missing required key \"{0}\"")]
    MissingKey(&'static str),
    #[error("key \"{0}\" has the wrong type")]
    WrongType(&'static str),
}

/// Removes U+FFFD replacement characters; every other code point is kept in
/// order. Total and idempotent.
pub fn sanitize_utf8(text: &str) -> String {
    text.chars().filter(|&c| c != REPLACEMENT_CHAR).collect()
}

/// Unwraps a whole-string markdown code fence.
///
/// Accepted forms: ```` ```<optional tag>\n ... ``` ```` and a whole-string
/// single-backtick wrap whose inner text contains no backtick. Anything else
/// is returned unchanged. Nested wrappers are stripped to a fixed point, so
/// the function is idempotent on every input.
pub fn strip_code_fences(text: &str) -> String {
    let mut current = text.to_string();
    loop {
        let next = strip_one_fence(&current);
        if next == current {
            return current;
        }
        current = next;
    }
}

fn strip_one_fence(text: &str) -> String {
    let trimmed = text.trim();

    if let Some(rest) = trimmed.strip_prefix("```") {
        if let Some(end) = rest.strip_suffix("```") {
            // Optional language tag runs to the first newline and may not
            // contain a backtick.
            if let Some(newline) = end.find('\n') {
                let tag = &end[..newline];
                if !tag.contains('`') {
                    return end[newline + 1..].trim().to_string();
                }
            }
        }
        return text.to_string();
    }

    if trimmed.len() >= 2 && trimmed.starts_with('`') && trimmed.ends_with('`') {
        let inner = &trimmed[1..trimmed.len() - 1];
        if !inner.contains('`') {
            return inner.trim().to_string();
        }
    }

    text.to_string()
}

fn string_array(value: &Value) -> Option<Vec<String>> {
    let arr = value.as_array()?;
    Some(
        arr.iter()
            .filter_map(|v| v.as_str().map(str::to_string))
            .collect(),
    )
}

/// Standard decode against the canonical English key names. Unknown keys are
/// ignored; a missing or mistyped required key fails so later layers engage.
pub fn direct_decode(text: &str, schema: SchemaVariant) -> Result<ParsedPuzzle, DecodeFailure> {
    let value: Value =
        serde_json::from_str(text.trim()).map_err(|e| DecodeFailure::NotAnObject(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| DecodeFailure::NotAnObject("top-level value is not an object".into()))?;

    let word = match obj.get("word") {
        Some(v) => Some(
            v.as_str()
                .ok_or(DecodeFailure::WrongType("word"))?
                .to_string(),
        ),
        None => None,
    };
    let hints = match obj.get("hints") {
        Some(v) => {
            if !v.is_array() {
                return Err(DecodeFailure::WrongType("hints"));
            }
            string_array(v).unwrap_or_default()
        }
        None => Vec::new(),
    };
    let category = obj
        .get("category")
        .and_then(Value::as_str)
        .map(str::to_string);
    let difficulty = obj.get("difficulty").and_then(Value::as_i64);

    if schema.requires_word() && word.is_none() {
        return Err(DecodeFailure::MissingKey("word"));
    }
    if !obj.contains_key("hints") {
        return Err(DecodeFailure::MissingKey("hints"));
    }

    Ok(ParsedPuzzle {
        word,
        hints,
        category,
        difficulty,
    })
}

fn json_object_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    // The one-level-nesting object pattern, applied verbatim.
    PATTERN.get_or_init(|| Regex::new(r"\{[^{}]*(?:\{[^{}]*\}[^{}]*)*\}").unwrap())
}

/// Returns the first substring matching the one-level-nesting JSON object
/// pattern, or `None`.
pub fn regex_extract_json(text: &str) -> Option<&str> {
    json_object_pattern().find(text).map(|m| m.as_str())
}

fn trimmed_nonempty(items: impl IntoIterator<Item = String>) -> Vec<String> {
    items
        .into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Decodes a generic object and assigns fields by value shape, ignoring key
/// names entirely. Iteration follows the object's textual key order; the
/// first match wins for every field. Succeeds only when a word was assigned
/// and at least two hints survived trimming.
pub fn structural_parse(text: &str) -> Option<ParsedPuzzle> {
    let value: Value = serde_json::from_str(text.trim()).ok()?;
    let obj = value.as_object()?;

    let mut word: Option<String> = None;
    let mut category: Option<String> = None;
    let mut difficulty: Option<i64> = None;
    let mut hints: Option<Vec<String>> = None;

    for (_, value) in obj {
        match value {
            Value::Array(_) => {
                if hints.is_none() {
                    if let Some(items) = string_array(value) {
                        hints = Some(trimmed_nonempty(items));
                    }
                }
            }
            Value::Number(n) => {
                if difficulty.is_none() {
                    if let Some(i) = n.as_i64() {
                        difficulty = Some(i);
                    }
                }
            }
            Value::String(s) => {
                let len = s.chars().count();
                if word.is_none() && (2..=9).contains(&len) && !s.contains(' ') {
                    word = Some(s.clone());
                } else if category.is_none() {
                    category = Some(s.clone());
                }
            }
            _ => {}
        }
    }

    let word = word?;
    let hints = hints?;
    if hints.len() < 2 {
        return None;
    }
    Some(ParsedPuzzle {
        word: Some(word),
        hints,
        category,
        difficulty,
    })
}

/// Returns the string-array value of the first key (in textual order) whose
/// lowercase form is a recognized hint key, or `None`.
pub fn parse_hints_multilang(text: &str) -> Option<Vec<String>> {
    let value: Value = serde_json::from_str(text.trim()).ok()?;
    let obj = value.as_object()?;
    for (key, value) in obj {
        if HINT_KEYS.contains(&key.to_lowercase().as_str()) {
            let items = string_array(value)?;
            return Some(trimmed_nonempty(items));
        }
    }
    None
}

/// Splits `hint1 | hint2 | hint3` text. Declines when braces are present,
/// no separator exists, or fewer than two non-empty segments result.
pub fn parse_pipe_delimited(text: &str) -> Option<Vec<String>> {
    let trimmed = text.trim();
    if !trimmed.contains('|') || trimmed.contains('{') || trimmed.contains('}') {
        return None;
    }
    let segments = trimmed_nonempty(trimmed.split('|').map(str::to_string));
    if segments.len() < 2 {
        return None;
    }
    Some(segments)
}

fn numbered_line_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| Regex::new(r"^\s*\d+[.)]\s+(.*)$").unwrap())
}

/// Extracts `1. hint` / `2) hint` lines in order; `None` if fewer than two.
pub fn parse_numbered_list(text: &str) -> Option<Vec<String>> {
    let items: Vec<String> = text
        .lines()
        .filter_map(|line| {
            numbered_line_pattern()
                .captures(line)
                .map(|c| c[1].to_string())
        })
        .collect();
    let items = trimmed_nonempty(items);
    if items.len() < 2 {
        return None;
    }
    Some(items)
}

fn hint_only_payload(hints: Vec<String>) -> ParsedPuzzle {
    ParsedPuzzle {
        word: None,
        hints,
        category: None,
        difficulty: None,
    }
}

/// Runs the full pipeline over a raw output and returns the first success
/// with its strategy tag.
///
/// Layer order: sanitize, fence strip, direct decode, then for hint-only
/// schemas the hint-key search and plain-text formats, then regex extraction
/// (decode, structural, and for hint-only schemas key search on the
/// extracted substring, all reported as `RegexExtracted`), then structural
/// parse of the full text. A declining layer never mutates the text seen by
/// the next layer.
pub fn parse(raw: &RawModelOutput, schema: SchemaVariant) -> Result<ParseOutcome, ParseFailure> {
    let sanitized_text = sanitize_utf8(&raw.text);
    let sanitized = sanitized_text != raw.text;
    let cleaned = strip_code_fences(&sanitized_text);
    let fence_changed = cleaned != sanitized_text;

    let mut layers = Vec::new();
    let outcome = |payload: ParsedPuzzle, strategy: ParseStrategy| ParseOutcome {
        payload,
        strategy,
        sanitized,
    };

    match direct_decode(&cleaned, schema) {
        Ok(payload) => {
            let strategy = if fence_changed {
                ParseStrategy::FenceStripped
            } else {
                ParseStrategy::DirectDecode
            };
            return Ok(outcome(payload, strategy));
        }
        Err(e) => layers.push(LayerOutcome {
            layer: "direct_decode".into(),
            detail: e.to_string(),
        }),
    }

    if schema == SchemaVariant::HintsOnlyDay5 {
        match parse_hints_multilang(&cleaned) {
            Some(hints) => {
                return Ok(outcome(
                    hint_only_payload(hints),
                    ParseStrategy::HintKeySearch,
                ))
            }
            None => layers.push(LayerOutcome {
                layer: "hint_key_search".into(),
                detail: "no recognized hint key".into(),
            }),
        }
        match parse_pipe_delimited(&cleaned) {
            Some(hints) => {
                return Ok(outcome(
                    hint_only_payload(hints),
                    ParseStrategy::PipeDelimited,
                ))
            }
            None => layers.push(LayerOutcome {
                layer: "pipe_delimited".into(),
                detail: "not a pipe-delimited hint list".into(),
            }),
        }
        match parse_numbered_list(&cleaned) {
            Some(hints) => {
                return Ok(outcome(
                    hint_only_payload(hints),
                    ParseStrategy::NumberedList,
                ))
            }
            None => layers.push(LayerOutcome {
                layer: "numbered_list".into(),
                detail: "fewer than two numbered lines".into(),
            }),
        }
    }

    match regex_extract_json(&cleaned) {
        // A match spanning the whole text extracted nothing new; the direct
        // layer already failed on it and the structural layer follows.
        Some(extracted) if extracted != cleaned.trim() => {
            if let Ok(payload) = direct_decode(extracted, schema) {
                return Ok(outcome(payload, ParseStrategy::RegexExtracted));
            }
            if let Some(payload) = structural_parse(extracted) {
                return Ok(outcome(payload, ParseStrategy::RegexExtracted));
            }
            if schema == SchemaVariant::HintsOnlyDay5 {
                if let Some(hints) = parse_hints_multilang(extracted) {
                    return Ok(outcome(
                        hint_only_payload(hints),
                        ParseStrategy::RegexExtracted,
                    ));
                }
            }
            layers.push(LayerOutcome {
                layer: "regex_extracted".into(),
                detail: "extracted object did not decode or parse structurally".into(),
            });
        }
        Some(_) => layers.push(LayerOutcome {
            layer: "regex_extracted".into(),
            detail: "match spans the whole text; nothing to extract".into(),
        }),
        None => layers.push(LayerOutcome {
            layer: "regex_extracted".into(),
            detail: "no object-shaped substring".into(),
        }),
    }

    match structural_parse(&cleaned) {
        Some(payload) => Ok(outcome(payload, ParseStrategy::Structural)),
        None => {
            layers.push(LayerOutcome {
                layer: "structural".into(),
                detail: "no word/hints assignable by value shape".into(),
            });
            Err(ParseFailure { layers })
        }
    }
}

/// Strict single-strategy parse: direct decode of the raw text only, for
/// experiments with defensive parsing disabled.
pub fn parse_direct_only(
    raw: &RawModelOutput,
    schema: SchemaVariant,
) -> Result<ParseOutcome, ParseFailure> {
    match direct_decode(&raw.text, schema) {
        Ok(payload) => Ok(ParseOutcome {
            payload,
            strategy: ParseStrategy::DirectDecode,
            sanitized: false,
        }),
        Err(e) => Err(ParseFailure {
            layers: vec![LayerOutcome {
                layer: "direct_decode".into(),
                detail: e.to_string(),
            }],
        }),
    }
}
