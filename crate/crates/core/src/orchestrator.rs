//! The generation loop: level-based batching, session rotation, contextual
//! retry with escalating prompts, no-repeat tracking, and the deterministic
//! hint fallback.
//!
//! Retry escalation per item: the standard prompt, then the concrete
//! rejection feedback, then a simplified prompt. Sessions are rotated every
//! `session_rotation` items and never span level boundaries, so one session
//! always works a single word length.

use std::collections::BTreeSet;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineError, GenerationIntent, ModelEngine, SessionHandle};
use crate::parser;
use crate::prompts::{
    self, build_hint_prompt, build_invalid_response_prompt, build_puzzle_prompt,
    build_retry_prompt, build_simplified_prompt, LanguageSpec, RewriteGeneration,
};
use crate::report::GenerationReport;
use crate::validator::{self, SchemaVariant, ValidationFailure, ValidationRuleSet};
use crate::wordlists::{select_word, WordList};

/// Who supplies the word and how much the model is asked to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationMode {
    /// The model invents the whole puzzle (historical day-1/2 behavior).
    LlmFullPuzzle,
    /// The model invents the word and the hints.
    LlmWordAndHints,
    /// Curated lists supply the word; the model only writes hints.
    CuratedWordLlmHints,
}

/// One generation cycle: a word length and how many puzzles to produce at it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    pub word_length: usize,
    pub batch_size: usize,
}

/// Cycle 0 does a warm-up batch of short words; cycles past the end repeat
/// the last level.
pub fn default_levels() -> Vec<Level> {
    vec![
        Level {
            word_length: 4,
            batch_size: 5,
        },
        Level {
            word_length: 5,
            batch_size: 10,
        },
        Level {
            word_length: 6,
            batch_size: 10,
        },
    ]
}

pub const DEFAULT_SESSION_ROTATION: usize = 5;
pub const DEFAULT_MAX_ATTEMPTS_PER_ITEM: usize = 3;

/// Everything a batch run needs to know.
#[derive(Debug, Clone)]
pub struct GenerationConfig {
    pub mode: GenerationMode,
    pub schema: SchemaVariant,
    pub levels: Vec<Level>,
    /// Items per session before a fresh one is opened. `usize::MAX`
    /// effectively disables rotation.
    pub session_rotation: usize,
    pub max_attempts_per_item: usize,
    pub language: LanguageSpec,
    pub seed: u64,
    pub prompt_rewrite: RewriteGeneration,
    /// When false, only the direct decode layer runs.
    pub defensive_parsing: bool,
    /// When false, retries blindly repeat the original prompt.
    pub contextual_retry: bool,
    /// When false, curated items that exhaust their attempts are skipped
    /// instead of falling back.
    pub fallback: bool,
}

impl GenerationConfig {
    /// The final architecture: curated words, hint-only generation, all
    /// resilience strategies on.
    pub fn curated(language: LanguageSpec, seed: u64) -> Self {
        GenerationConfig {
            mode: GenerationMode::CuratedWordLlmHints,
            schema: SchemaVariant::HintsOnlyDay5,
            levels: default_levels(),
            session_rotation: DEFAULT_SESSION_ROTATION,
            max_attempts_per_item: DEFAULT_MAX_ATTEMPTS_PER_ITEM,
            language,
            seed,
            prompt_rewrite: RewriteGeneration::Day5HintOnly,
            defensive_parsing: true,
            contextual_retry: true,
            fallback: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PuzzleSource {
    Model,
    ModelRetried,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Puzzle {
    pub word: String,
    pub hints: Vec<String>,
    pub source: PuzzleSource,
}

/// Fatal batch-level errors.
#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("engine not initialized")]
    EngineNotReady,
    #[error("no unexcluded words of length {length} remain")]
    WordExhausted { length: usize },
    #[error("engine error: {0}")]
    Engine(#[from] EngineError),
}

/// An item used up all its attempts without passing validation.
#[derive(Debug, Clone, Error)]
#[error("item failed after {attempts} attempts: {last_error}")]
pub struct ItemFailure {
    pub attempts: usize,
    pub last_error: String,
}

/// Per-item outcome: exhausted attempts are recoverable (fallback or skip),
/// engine errors are not.
#[derive(Debug, Error)]
pub enum ItemError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Failed(ItemFailure),
}

/// Set of normalized words that must not be produced again. The caller owns
/// persistence; batches only read and insert.
pub trait UsedWordStore {
    fn contains(&self, normalized_word: &str) -> bool;
    fn insert(&mut self, normalized_word: String);
    /// Sorted snapshot for exclusion-list rendering.
    fn words(&self) -> Vec<String>;
}

#[derive(Debug, Default)]
pub struct InMemoryUsedWords {
    words: BTreeSet<String>,
}

impl InMemoryUsedWords {
    pub fn new() -> Self {
        Self::default()
    }
}

impl UsedWordStore for InMemoryUsedWords {
    fn contains(&self, normalized_word: &str) -> bool {
        self.words.contains(normalized_word)
    }

    fn insert(&mut self, normalized_word: String) {
        self.words.insert(normalized_word);
    }

    fn words(&self) -> Vec<String> {
        self.words.iter().cloned().collect()
    }
}

/// Line-per-word file store. Inserts are written through immediately; the
/// first write error is kept and surfaced via [`FileUsedWords::io_error`].
#[derive(Debug)]
pub struct FileUsedWords {
    path: PathBuf,
    words: BTreeSet<String>,
    io_error: Option<std::io::Error>,
}

impl FileUsedWords {
    pub fn open(path: &Path) -> std::io::Result<Self> {
        let words = match std::fs::read_to_string(path) {
            Ok(content) => content
                .lines()
                .map(|l| l.trim().to_string())
                .filter(|l| !l.is_empty())
                .collect(),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeSet::new(),
            Err(e) => return Err(e),
        };
        Ok(FileUsedWords {
            path: path.to_path_buf(),
            words,
            io_error: None,
        })
    }

    pub fn io_error(&self) -> Option<&std::io::Error> {
        self.io_error.as_ref()
    }

    fn append(&mut self, word: &str) {
        if self.io_error.is_some() {
            return;
        }
        let result = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .and_then(|mut f| writeln!(f, "{word}"));
        if let Err(e) = result {
            self.io_error = Some(e);
        }
    }
}

impl UsedWordStore for FileUsedWords {
    fn contains(&self, normalized_word: &str) -> bool {
        self.words.contains(normalized_word)
    }

    fn insert(&mut self, normalized_word: String) {
        if self.words.insert(normalized_word.clone()) {
            self.append(&normalized_word);
        }
    }

    fn words(&self) -> Vec<String> {
        self.words.iter().cloned().collect()
    }
}

/// The three template hints per language, with the word's letter count
/// interpolated into the third. Unknown languages get the English templates.
/// Never inspects the word beyond its length.
pub fn fallback_hints(word: &str, language: &str) -> [String; 3] {
    let n = word.chars().count();
    match language {
        "pt" => [
            "E algo que as pessoas conhecem".to_string(),
            "Pode ser encontrado no dia a dia".to_string(),
            format!("Tem {n} letras"),
        ],
        "es" => [
            "Es algo que la gente conoce".to_string(),
            "Se puede encontrar en el dia a dia".to_string(),
            format!("Tiene {n} letras"),
        ],
        _ => [
            "It is something people know".to_string(),
            "It can be found in everyday life".to_string(),
            format!("It has {n} letters"),
        ],
    }
}

/// True when enough unplayed puzzles remain and generation should be skipped.
pub fn replenishment_gate(unplayed: usize, threshold: usize) -> bool {
    debug_assert!(threshold > 0, "threshold must be positive");
    unplayed >= threshold
}

fn level_at(levels: &[Level], cycle: usize) -> Level {
    levels[cycle.min(levels.len() - 1)]
}

fn combined_exclusions(
    used_words: &dyn UsedWordStore,
    batch_words: &BTreeSet<String>,
    rejected_local: &BTreeSet<String>,
) -> BTreeSet<String> {
    let mut all: BTreeSet<String> = used_words.words().into_iter().collect();
    all.extend(batch_words.iter().cloned());
    all.extend(rejected_local.iter().cloned());
    all
}

/// Inputs for a single item within a batch.
pub struct ItemContext<'a> {
    /// Rule set for the active level (no exclusions; those are supplied
    /// separately and merged per attempt).
    pub rules: &'a ValidationRuleSet,
    /// The curated word, when the mode supplies one.
    pub target_word: Option<&'a str>,
    /// Normalized words excluded before this item started.
    pub exclusions: &'a BTreeSet<String>,
}

fn build_intent(
    ctx: &ItemContext<'_>,
    config: &GenerationConfig,
    exclusions: &BTreeSet<String>,
) -> GenerationIntent {
    match ctx.target_word {
        Some(word) => GenerationIntent::Hints {
            word: word.to_string(),
            language: config.language.code().to_string(),
        },
        None => GenerationIntent::Puzzle {
            language: config.language.code().to_string(),
            min_len: ctx.rules.word_min_len,
            max_len: ctx.rules.word_max_len,
            schema: config.schema,
            exclusions: exclusions.iter().cloned().collect(),
        },
    }
}

fn append_exclusion_clause(prompt: &mut String, exclusions: &BTreeSet<String>) {
    let list: Vec<String> = exclusions.iter().cloned().collect();
    if let Some(clause) = prompts::exclusion_clause(&list) {
        prompt.push('\n');
        prompt.push_str(&clause);
    }
}

/// Runs up to `max_attempts_per_item` generate calls for one puzzle.
///
/// Attempt 1 sends the standard prompt. With contextual retry enabled, a
/// validation failure leads to a feedback prompt quoting the concrete
/// rejection (with retry feedback signalled to the engine), a parse failure
/// to a generic invalid-response prompt, and the final attempt to the
/// simplified prompt; every rejected word is added to `rejected_local` and
/// excluded from subsequent prompts. With contextual retry disabled, every
/// attempt repeats the original prompt verbatim.
pub fn generate_one<E: ModelEngine + ?Sized>(
    engine: &mut E,
    session: SessionHandle,
    config: &GenerationConfig,
    ctx: &ItemContext<'_>,
    rejected_local: &mut BTreeSet<String>,
    report: &mut GenerationReport,
) -> Result<Puzzle, ItemError> {
    let lang = &config.language;
    let curated = ctx.target_word.is_some();

    let standard_prompt = |exclusions: &BTreeSet<String>| -> String {
        match ctx.target_word {
            Some(word) => build_hint_prompt(word, lang).user,
            None => {
                let list: Vec<String> = exclusions.iter().cloned().collect();
                build_puzzle_prompt(ctx.rules, lang, &list, config.prompt_rewrite).user
            }
        }
    };

    let initial_exclusions = {
        let mut all = ctx.exclusions.clone();
        all.extend(rejected_local.iter().cloned());
        all
    };
    let first_prompt = standard_prompt(&initial_exclusions);
    let first_intent = build_intent(ctx, config, &initial_exclusions);

    let mut last_failure: Option<ValidationFailure> = None;
    let mut last_word_excluded = false;
    let mut last_error = String::from("no attempts made");

    for attempt in 1..=config.max_attempts_per_item {
        let current_exclusions = {
            let mut all = ctx.exclusions.clone();
            all.extend(rejected_local.iter().cloned());
            all
        };

        let (user_prompt, intent) = if attempt == 1 || !config.contextual_retry {
            // Blind mode: every retry repeats the original prompt verbatim,
            // with no feedback signal and no exclusion updates.
            (first_prompt.clone(), first_intent.clone())
        } else {
            if let Some(failure) = &last_failure {
                engine.apply_retry_feedback(
                    session,
                    failure.kind(),
                    last_word_excluded || curated,
                )?;
            }
            let prompt = match (attempt == config.max_attempts_per_item, &last_failure) {
                (false, Some(failure)) => {
                    let mut p = build_retry_prompt(failure, ctx.rules);
                    if !curated {
                        append_exclusion_clause(&mut p, &current_exclusions);
                    }
                    p
                }
                (false, None) => build_invalid_response_prompt(ctx.rules),
                // Final attempt: the simplified prompt, still carrying the
                // accumulated exclusions. Hint-only requests have no simpler
                // form and re-send the standard prompt.
                (true, _) => {
                    if curated {
                        standard_prompt(&current_exclusions)
                    } else {
                        let mut p = build_simplified_prompt(ctx.rules, lang).user;
                        append_exclusion_clause(&mut p, &current_exclusions);
                        p
                    }
                }
            };
            (prompt, build_intent(ctx, config, &current_exclusions))
        };

        let raw = engine.generate(session, &user_prompt, &intent)?;
        report.attempts_total += 1;

        let parse_result = if config.defensive_parsing {
            parser::parse(&raw, config.schema)
        } else {
            parser::parse_direct_only(&raw, config.schema)
        };

        let outcome = match parse_result {
            Ok(outcome) => outcome,
            Err(failure) => {
                last_failure = None;
                last_error = failure.to_string();
                continue;
            }
        };

        *report
            .parse_strategy_counts
            .entry(outcome.strategy)
            .or_insert(0) += 1;
        if outcome.strategy == parser::ParseStrategy::DirectDecode && !outcome.sanitized {
            report.well_formed_outputs += 1;
        }

        let word = match ctx.target_word {
            Some(target) => target.to_string(),
            None => outcome.payload.word.clone().unwrap_or_default(),
        };
        let candidate = parser::ParsedPuzzle {
            word: Some(word.trim().to_string()),
            ..outcome.payload
        };

        let rules = ctx.rules.clone().with_exclusions(current_exclusions);
        let failures = validator::validate(&candidate, &rules);
        if failures.is_empty() {
            return Ok(Puzzle {
                word: candidate.word.unwrap_or_default(),
                hints: candidate.hints,
                source: if attempt == 1 {
                    PuzzleSource::Model
                } else {
                    PuzzleSource::ModelRetried
                },
            });
        }

        for failure in &failures {
            *report.violation_counts.entry(failure.kind()).or_insert(0) += 1;
        }
        last_word_excluded = false;
        if config.contextual_retry && !curated {
            let normalized = validator::normalize_word(&word);
            if !normalized.is_empty() {
                rejected_local.insert(normalized);
                last_word_excluded = true;
            }
        }
        last_error = failures[0].message.clone();
        last_failure = Some(failures.into_iter().next().expect("nonempty"));
    }

    Err(ItemError::Failed(ItemFailure {
        attempts: config.max_attempts_per_item,
        last_error,
    }))
}

/// Produces `count` puzzles, partitioned level by level and chunked into
/// sessions of at most `session_rotation` items. The progress callback fires
/// after every produced puzzle with `(done, count)`.
///
/// In curated mode with fallback enabled, exactly `count` puzzles come back;
/// legacy modes skip items that exhaust their attempts.
pub fn generate_batch<E: ModelEngine + ?Sized>(
    count: usize,
    config: &GenerationConfig,
    engine: &mut E,
    words: &WordList,
    used_words: &mut dyn UsedWordStore,
    start_cycle: usize,
    progress: &mut dyn FnMut(usize, usize),
) -> Result<(Vec<Puzzle>, GenerationReport), GenerateError> {
    if !engine.is_ready() {
        return Err(GenerateError::EngineNotReady);
    }
    assert!(!config.levels.is_empty(), "levels must not be empty");
    assert!(config.max_attempts_per_item >= 1);

    let mut report = GenerationReport {
        requested: count as u64,
        ..GenerationReport::default()
    };
    let latency_start = engine.simulated_latency_ms();
    let mut selection_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5e1e_c7ed_u64);
    let curated = config.mode == GenerationMode::CuratedWordLlmHints;

    let mut puzzles: Vec<Puzzle> = Vec::with_capacity(count);
    let mut batch_words: BTreeSet<String> = BTreeSet::new();
    // Cleared per batch by construction; exclusions persist across batches
    // only through the caller's used-word store.
    let mut rejected_local: BTreeSet<String> = BTreeSet::new();
    let mut done = 0usize;

    let mut remaining = count;
    let mut cycle = start_cycle;
    while remaining > 0 {
        let level = level_at(&config.levels, cycle);
        cycle += 1;
        let segment = level.batch_size.min(remaining);
        remaining -= segment;

        let rules = ValidationRuleSet::new(config.schema, level.word_length, level.word_length);
        let system_prompt = if curated {
            prompts::hint_system_prompt(&config.language)
        } else {
            build_puzzle_prompt(&rules, &config.language, &[], config.prompt_rewrite).system
        };

        let rotation = config.session_rotation.max(1);
        let mut seg_done = 0usize;
        while seg_done < segment {
            let chunk = rotation.min(segment - seg_done);
            let session = engine.create_session(&system_prompt)?;
            report.sessions_opened += 1;
            let mut session_hints: BTreeSet<String> = BTreeSet::new();
            let mut chunk_error: Option<GenerateError> = None;

            for _ in 0..chunk {
                let exclusions = combined_exclusions(used_words, &batch_words, &rejected_local);
                let selection = if curated {
                    match select_word(words, level.word_length, &exclusions, &mut selection_rng) {
                        Ok(selection) => Some(selection.word),
                        Err(e) => {
                            chunk_error = Some(GenerateError::WordExhausted { length: e.length });
                            break;
                        }
                    }
                } else {
                    None
                };

                let ctx = ItemContext {
                    rules: &rules,
                    target_word: selection.as_deref(),
                    exclusions: &exclusions,
                };
                match generate_one(
                    engine,
                    session,
                    config,
                    &ctx,
                    &mut rejected_local,
                    &mut report,
                ) {
                    Ok(puzzle) => {
                        if puzzle.source != PuzzleSource::Fallback {
                            if puzzle.hints.iter().any(|h| session_hints.contains(h)) {
                                report.duplicate_hint_puzzles += 1;
                            }
                            session_hints.extend(puzzle.hints.iter().cloned());
                        }
                        let normalized = validator::normalize_word(&puzzle.word);
                        batch_words.insert(normalized.clone());
                        used_words.insert(normalized);
                        puzzles.push(puzzle);
                        done += 1;
                        progress(done, count);
                    }
                    Err(ItemError::Failed(_)) => {
                        if curated && config.fallback {
                            let word = selection.expect("curated mode selected a word");
                            let hints = fallback_hints(&word, config.language.code()).to_vec();
                            let normalized = validator::normalize_word(&word);
                            batch_words.insert(normalized.clone());
                            used_words.insert(normalized);
                            puzzles.push(Puzzle {
                                word,
                                hints,
                                source: PuzzleSource::Fallback,
                            });
                            done += 1;
                            progress(done, count);
                        }
                        // Legacy modes (and curated with fallback disabled)
                        // skip the item; its slot is consumed either way.
                    }
                    Err(ItemError::Engine(e)) => {
                        chunk_error = Some(GenerateError::Engine(e));
                        break;
                    }
                }
                seg_done += 1;
            }

            engine.close_session(session)?;
            if let Some(e) = chunk_error {
                return Err(e);
            }
        }
    }

    report.produced = puzzles.len() as u64;
    report.fallback_used = puzzles
        .iter()
        .filter(|p| p.source == PuzzleSource::Fallback)
        .count() as u64;
    report.simulated_latency_ms = engine.simulated_latency_ms() - latency_start;
    report.finalize_estimate(config.schema.field_count());
    Ok((puzzles, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{FaultProfile, ModelPreset, SimulatedEngine};
    use crate::wordlists::load_word_list;

    fn pt() -> LanguageSpec {
        LanguageSpec::new("pt").unwrap()
    }

    fn test_wordlist() -> WordList {
        load_word_list(include_bytes!("../../../wordlists/words_pt.json")).unwrap()
    }

    fn curated_config(seed: u64) -> GenerationConfig {
        GenerationConfig::curated(pt(), seed)
    }

    fn word_mode_config(seed: u64) -> GenerationConfig {
        GenerationConfig {
            mode: GenerationMode::LlmWordAndHints,
            schema: SchemaVariant::WordAndHintsDay3,
            levels: vec![Level {
                word_length: 5,
                batch_size: 50,
            }],
            session_rotation: DEFAULT_SESSION_ROTATION,
            max_attempts_per_item: DEFAULT_MAX_ATTEMPTS_PER_ITEM,
            language: pt(),
            seed,
            prompt_rewrite: RewriteGeneration::Day4LanguageNames,
            defensive_parsing: true,
            contextual_retry: true,
            fallback: true,
        }
    }

    /// Wraps an engine and records every call for transcript assertions.
    struct RecordingEngine<E> {
        inner: E,
        prompts: Vec<String>,
        emitted_words: Vec<Option<String>>,
        feedback: Vec<(crate::validator::FailureKind, bool)>,
        max_turn_index: u32,
    }

    impl<E: ModelEngine> RecordingEngine<E> {
        fn new(inner: E) -> Self {
            RecordingEngine {
                inner,
                prompts: Vec::new(),
                emitted_words: Vec::new(),
                feedback: Vec::new(),
                max_turn_index: 0,
            }
        }
    }

    impl<E: ModelEngine> ModelEngine for RecordingEngine<E> {
        fn is_ready(&self) -> bool {
            self.inner.is_ready()
        }

        fn create_session(&mut self, system_prompt: &str) -> Result<SessionHandle, EngineError> {
            self.inner.create_session(system_prompt)
        }

        fn generate(
            &mut self,
            session: SessionHandle,
            user_prompt: &str,
            intent: &GenerationIntent,
        ) -> Result<crate::engine::RawModelOutput, EngineError> {
            self.prompts.push(user_prompt.to_string());
            let out = self.inner.generate(session, user_prompt, intent)?;
            self.max_turn_index = self.max_turn_index.max(out.turn_index);
            let word = serde_json::from_str::<serde_json::Value>(&out.text)
                .ok()
                .and_then(|v| v.get("word").and_then(|w| w.as_str()).map(str::to_string));
            self.emitted_words.push(word);
            Ok(out)
        }

        fn apply_retry_feedback(
            &mut self,
            session: SessionHandle,
            kind: crate::validator::FailureKind,
            exclusion_clause_present: bool,
        ) -> Result<(), EngineError> {
            self.feedback.push((kind, exclusion_clause_present));
            self.inner
                .apply_retry_feedback(session, kind, exclusion_clause_present)
        }

        fn close_session(&mut self, session: SessionHandle) -> Result<(), EngineError> {
            self.inner.close_session(session)
        }

        fn simulated_latency_ms(&self) -> u64 {
            self.inner.simulated_latency_ms()
        }
    }

    #[test]
    fn chunking_respects_rotation_and_levels() {
        // Single-level configs: rotation drives the session count alone.
        let cases = [(10usize, 5usize, 2u64), (7, 3, 3), (3, 5, 1)];
        for (count, rotation, expected_sessions) in cases {
            let mut config = curated_config(1);
            config.levels = vec![Level {
                word_length: 5,
                batch_size: count,
            }];
            config.session_rotation = rotation;
            let mut engine = SimulatedEngine::from_preset(ModelPreset::Perfect, 1);
            let mut used = InMemoryUsedWords::new();
            let (puzzles, report) = generate_batch(
                count,
                &config,
                &mut engine,
                &test_wordlist(),
                &mut used,
                0,
                &mut |_, _| {},
            )
            .unwrap();
            assert_eq!(puzzles.len(), count);
            assert_eq!(
                report.sessions_opened, expected_sessions,
                "count {count} rotation {rotation}"
            );
        }
    }

    #[test]
    fn default_levels_split_a_batch_of_ten_into_two_sessions() {
        // 5 four-letter puzzles then 5 five-letter ones, one session each.
        let config = curated_config(2);
        let mut engine = SimulatedEngine::from_preset(ModelPreset::Perfect, 2);
        let mut used = InMemoryUsedWords::new();
        let (puzzles, report) = generate_batch(
            10,
            &config,
            &mut engine,
            &test_wordlist(),
            &mut used,
            0,
            &mut |_, _| {},
        )
        .unwrap();
        assert_eq!(report.sessions_opened, 2);
        assert!(puzzles[..5].iter().all(|p| p.word.chars().count() == 4));
        assert!(puzzles[5..].iter().all(|p| p.word.chars().count() == 5));
    }

    #[test]
    fn hostile_engine_still_fills_the_batch_from_fallback() {
        let config = curated_config(3);
        let mut engine = SimulatedEngine::from_preset(ModelPreset::Hostile, 3);
        let mut used = InMemoryUsedWords::new();
        let (puzzles, report) = generate_batch(
            10,
            &config,
            &mut engine,
            &test_wordlist(),
            &mut used,
            0,
            &mut |_, _| {},
        )
        .unwrap();
        assert_eq!(puzzles.len(), 10);
        assert!(puzzles.iter().all(|p| p.source == PuzzleSource::Fallback));
        assert_eq!(report.fallback_used, 10);
        assert_eq!(report.produced, 10);
    }

    #[test]
    fn fallback_disabled_skips_failed_items() {
        let mut config = curated_config(3);
        config.fallback = false;
        let mut engine = SimulatedEngine::from_preset(ModelPreset::Hostile, 3);
        let mut used = InMemoryUsedWords::new();
        let (puzzles, report) = generate_batch(
            5,
            &config,
            &mut engine,
            &test_wordlist(),
            &mut used,
            0,
            &mut |_, _| {},
        )
        .unwrap();
        assert!(puzzles.is_empty());
        assert_eq!(report.produced, 0);
        assert_eq!(report.requested, 5);
    }

    #[test]
    fn retry_uses_feedback_and_succeeds_second_attempt() {
        // Word length violation certain on the first call, impossible on the
        // retry (compliance factor 0 is not allowed, so use a probe seed
        // where the second draw passes at 0.4 * 0.5).
        let profile = FaultProfile {
            p_word_length_violation: 1.0,
            retry_compliance_factor: 0.001,
            ..FaultProfile::perfect()
        };
        let mut engine = RecordingEngine::new(SimulatedEngine::new(profile, 11));
        let config = word_mode_config(11);
        let mut used = InMemoryUsedWords::new();
        let (puzzles, report) = generate_batch(
            1,
            &config,
            &mut engine,
            &test_wordlist(),
            &mut used,
            0,
            &mut |_, _| {},
        )
        .unwrap();
        assert_eq!(puzzles.len(), 1);
        assert_eq!(puzzles[0].source, PuzzleSource::ModelRetried);
        assert_eq!(report.attempts_total, 2);
        assert_eq!(
            report.violation_counts[&crate::validator::FailureKind::WordLength],
            1
        );
        // The retry prompt carried the concrete feedback and the exclusion.
        let retry_prompt = &engine.prompts[1];
        assert!(retry_prompt.contains("Your previous response was rejected"));
        assert!(retry_prompt.contains("letters but we asked for"));
        assert!(retry_prompt.contains("Do NOT use any of these words"));
        assert_eq!(engine.feedback.len(), 1);
        assert!(engine.feedback[0].1, "exclusion clause flag should be set");
    }

    #[test]
    fn blind_retry_repeats_the_same_prompt() {
        let profile = FaultProfile {
            p_word_length_violation: 1.0,
            ..FaultProfile::perfect()
        };
        let mut config = word_mode_config(5);
        config.contextual_retry = false;
        let mut engine = RecordingEngine::new(SimulatedEngine::new(profile, 5));
        let mut used = InMemoryUsedWords::new();
        let (puzzles, report) = generate_batch(
            1,
            &config,
            &mut engine,
            &test_wordlist(),
            &mut used,
            0,
            &mut |_, _| {},
        )
        .unwrap();
        assert!(puzzles.is_empty(), "every attempt violates length");
        assert_eq!(report.attempts_total, 3);
        assert_eq!(engine.prompts[0], engine.prompts[1]);
        assert_eq!(engine.prompts[1], engine.prompts[2]);
        assert!(engine.feedback.is_empty());
    }

    #[test]
    fn third_attempt_uses_simplified_prompt() {
        let profile = FaultProfile {
            p_word_length_violation: 1.0,
            retry_compliance_factor: 1.0,
            ..FaultProfile::perfect()
        };
        let mut engine = RecordingEngine::new(SimulatedEngine::new(profile, 17));
        let config = word_mode_config(17);
        let mut used = InMemoryUsedWords::new();
        let _ = generate_batch(
            1,
            &config,
            &mut engine,
            &test_wordlist(),
            &mut used,
            0,
            &mut |_, _| {},
        )
        .unwrap();
        assert_eq!(engine.prompts.len(), 3);
        assert!(engine.prompts[2].contains("Give one common noun"));
    }

    #[test]
    fn progress_is_monotonic_and_ends_at_count() {
        let config = curated_config(9);
        let mut engine = SimulatedEngine::from_preset(ModelPreset::CompactLike, 9);
        let mut used = InMemoryUsedWords::new();
        let mut calls: Vec<(usize, usize)> = Vec::new();
        let (_, _) = generate_batch(
            12,
            &config,
            &mut engine,
            &test_wordlist(),
            &mut used,
            0,
            &mut |done, total| calls.push((done, total)),
        )
        .unwrap();
        assert_eq!(calls.len(), 12);
        for (i, (done, total)) in calls.iter().enumerate() {
            assert_eq!(*done, i + 1);
            assert_eq!(*total, 12);
        }
    }

    #[test]
    fn batch_words_never_repeat() {
        for seed in 0..8 {
            let config = curated_config(seed);
            let mut engine = SimulatedEngine::from_preset(ModelPreset::CompactLike, seed);
            let mut used = InMemoryUsedWords::new();
            used.insert("gato".to_string());
            let (puzzles, _) = generate_batch(
                12,
                &config,
                &mut engine,
                &test_wordlist(),
                &mut used,
                0,
                &mut |_, _| {},
            )
            .unwrap();
            let mut seen = BTreeSet::new();
            for p in &puzzles {
                let n = validator::normalize_word(&p.word);
                assert_ne!(n, "gato", "used word resurfaced (seed {seed})");
                assert!(seen.insert(n), "duplicate word in batch (seed {seed})");
            }
        }
    }

    #[test]
    fn curated_words_always_match_level_length() {
        for seed in 0..6 {
            let config = curated_config(seed + 100);
            let mut engine = SimulatedEngine::from_preset(ModelPreset::CompactLike, seed + 100);
            let mut used = InMemoryUsedWords::new();
            let (puzzles, report) = generate_batch(
                25,
                &config,
                &mut engine,
                &test_wordlist(),
                &mut used,
                0,
                &mut |_, _| {},
            )
            .unwrap();
            assert_eq!(puzzles.len(), 25);
            assert_eq!(
                report
                    .violation_counts
                    .get(&crate::validator::FailureKind::WordLength),
                None
            );
            let lengths: Vec<usize> = puzzles.iter().map(|p| p.word.chars().count()).collect();
            let expected: Vec<usize> = std::iter::repeat_n(4, 5)
                .chain(std::iter::repeat_n(5, 10))
                .chain(std::iter::repeat_n(6, 10))
                .collect();
            assert_eq!(lengths, expected);
        }
    }

    #[test]
    fn session_turns_stay_within_rotation_times_attempts() {
        let config = curated_config(21);
        let mut engine =
            RecordingEngine::new(SimulatedEngine::from_preset(ModelPreset::CompactLike, 21));
        let mut used = InMemoryUsedWords::new();
        let _ = generate_batch(
            25,
            &config,
            &mut engine,
            &test_wordlist(),
            &mut used,
            0,
            &mut |_, _| {},
        )
        .unwrap();
        let bound = (config.session_rotation * config.max_attempts_per_item) as u32;
        assert!(engine.max_turn_index < bound);
    }

    #[test]
    fn identical_seeds_give_identical_reports_and_puzzles() {
        let run = || {
            let config = curated_config(31);
            let mut engine = SimulatedEngine::from_preset(ModelPreset::CompactLike, 31);
            let mut used = InMemoryUsedWords::new();
            generate_batch(
                15,
                &config,
                &mut engine,
                &test_wordlist(),
                &mut used,
                0,
                &mut |_, _| {},
            )
            .unwrap()
        };
        let (p1, r1) = run();
        let (p2, r2) = run();
        assert_eq!(p1, p2);
        assert_eq!(r1, r2);
    }

    #[test]
    fn not_ready_engine_is_a_precondition_error() {
        let mut engine = SimulatedEngine::from_preset(ModelPreset::Perfect, 1);
        engine.set_ready(false);
        let config = curated_config(1);
        let mut used = InMemoryUsedWords::new();
        let err = generate_batch(
            5,
            &config,
            &mut engine,
            &test_wordlist(),
            &mut used,
            0,
            &mut |_, _| {},
        )
        .unwrap_err();
        assert!(matches!(err, GenerateError::EngineNotReady));
    }

    #[test]
    fn word_exhaustion_is_reported() {
        let config = curated_config(1);
        let mut engine = SimulatedEngine::from_preset(ModelPreset::Perfect, 1);
        let mut used = InMemoryUsedWords::new();
        let tiny = load_word_list(br#"{"language": "pt", "words": ["gato", "casa"]}"#).unwrap();
        let err = generate_batch(5, &config, &mut engine, &tiny, &mut used, 0, &mut |_, _| {})
            .unwrap_err();
        assert!(matches!(err, GenerateError::WordExhausted { length: 4 }));
    }

    #[test]
    fn fallback_templates_interpolate_letter_count() {
        assert_eq!(
            fallback_hints("gato", "pt"),
            [
                "E algo que as pessoas conhecem".to_string(),
                "Pode ser encontrado no dia a dia".to_string(),
                "Tem 4 letras".to_string(),
            ]
        );
        assert_eq!(fallback_hints("sun", "en")[2], "It has 3 letters");
        // Unknown languages take the English templates, grammar untouched.
        assert_eq!(fallback_hints("x", "fr")[2], "It has 1 letters");
        assert_eq!(fallback_hints("nube", "es")[2], "Tiene 4 letras");
    }

    #[test]
    fn replenishment_gate_uses_at_least_comparison() {
        assert!(replenishment_gate(12, 10));
        assert!(!replenishment_gate(0, 10));
        assert!(replenishment_gate(10, 10));
    }

    #[test]
    fn file_used_words_round_trip() {
        let dir = std::env::temp_dir().join(format!("puzzlesmith-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("used_words.txt");
        let _ = std::fs::remove_file(&path);
        {
            let mut store = FileUsedWords::open(&path).unwrap();
            store.insert("gato".to_string());
            store.insert("casa".to_string());
            store.insert("gato".to_string());
            assert!(store.io_error().is_none());
        }
        let store = FileUsedWords::open(&path).unwrap();
        assert!(store.contains("gato"));
        assert!(store.contains("casa"));
        assert_eq!(store.words().len(), 2);
        let _ = std::fs::remove_file(&path);
    }
}
