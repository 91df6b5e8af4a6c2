//! Seeded fault-injecting mock model engine.
//!
//! The simulator constructs a compliant structured response for each request
//! and then independently applies each configured fault: code-fence wrapping,
//! key translation, replacement-character insertion, word-length violations,
//! hint-contains-word injection, language drift, word repetition, per-field
//! syntax corruption, and turn-based context degradation. Everything is
//! driven by one seeded RNG stream, so identical seed and call sequence give
//! byte-identical outputs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{EngineError, GenerationIntent, ModelEngine, RawModelOutput, SessionHandle};
use crate::validator::{FailureKind, SchemaVariant};

/// Per-failure-mode probabilities and the degradation schedule.
///
/// Defaults are representative calibrations of observed failure frequencies,
/// not ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaultProfile {
    // Format faults.
    pub p_code_fence: f64,
    pub p_key_translation: f64,
    pub p_utf8_corruption: f64,
    // Constraint faults.
    pub p_word_length_violation: f64,
    pub p_hint_contains_word: f64,
    pub p_language_drift: f64,
    pub p_repeat_word: f64,
    /// Base probability of echoing a historical hint; degradation adds to it.
    pub p_hint_repetition: f64,
    // Context degradation.
    pub degradation_onset_turn: u32,
    pub degradation_increment: f64,
    /// Independent per-field syntax corruption, the `p` of `(1-p)^n`.
    pub p_field_malformed: f64,
    /// Multiplier applied to the rejected failure kind on the next call
    /// after retry feedback.
    pub retry_compliance_factor: f64,
    pub per_token_latency_ms: f64,
}

impl Default for FaultProfile {
    fn default() -> Self {
        FaultProfile {
            p_code_fence: 0.25,
            p_key_translation: 0.17,
            p_utf8_corruption: 0.03,
            p_word_length_violation: 0.4,
            p_hint_contains_word: 0.10,
            p_language_drift: 0.10,
            p_repeat_word: 0.6,
            p_hint_repetition: 0.0,
            degradation_onset_turn: 3,
            degradation_increment: 0.15,
            p_field_malformed: 0.0,
            retry_compliance_factor: 0.5,
            per_token_latency_ms: 30.0,
        }
    }
}

impl FaultProfile {
    /// A profile with every fault disabled.
    pub fn perfect() -> Self {
        FaultProfile {
            p_code_fence: 0.0,
            p_key_translation: 0.0,
            p_utf8_corruption: 0.0,
            p_word_length_violation: 0.0,
            p_hint_contains_word: 0.0,
            p_language_drift: 0.0,
            p_repeat_word: 0.0,
            p_hint_repetition: 0.0,
            degradation_onset_turn: 1,
            degradation_increment: 0.0,
            p_field_malformed: 0.0,
            retry_compliance_factor: 1.0,
            per_token_latency_ms: 0.0,
        }
    }

    /// Checks every probability is in `[0, 1]` and the onset turn is `>= 1`.
    pub fn validate(&self) -> Result<(), String> {
        let probs = [
            ("p_code_fence", self.p_code_fence),
            ("p_key_translation", self.p_key_translation),
            ("p_utf8_corruption", self.p_utf8_corruption),
            ("p_word_length_violation", self.p_word_length_violation),
            ("p_hint_contains_word", self.p_hint_contains_word),
            ("p_language_drift", self.p_language_drift),
            ("p_repeat_word", self.p_repeat_word),
            ("p_hint_repetition", self.p_hint_repetition),
            ("p_field_malformed", self.p_field_malformed),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if self.degradation_onset_turn < 1 {
            return Err("degradation_onset_turn must be >= 1".to_string());
        }
        if !(0.0..=1.0).contains(&self.retry_compliance_factor)
            || self.retry_compliance_factor == 0.0
        {
            return Err("retry_compliance_factor must be in (0, 1]".to_string());
        }
        if self.degradation_increment < 0.0 {
            return Err("degradation_increment must be non-negative".to_string());
        }
        if self.per_token_latency_ms < 0.0 {
            return Err("per_token_latency_ms must be non-negative".to_string());
        }
        Ok(())
    }
}

/// Named fault profiles modelled after observed model behaviors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelPreset {
    /// Small-model behavior: degradation sets in after ~3 turns.
    CompactLike,
    /// Larger-model behavior: lower fault rates, degradation after ~5 turns.
    PremiumLike,
    /// Every fault disabled.
    Perfect,
    /// Every failure probability at 1; nothing ever parses or validates.
    Hostile,
}

impl ModelPreset {
    pub fn profile(self) -> FaultProfile {
        match self {
            ModelPreset::CompactLike => FaultProfile {
                per_token_latency_ms: 29.0,
                ..FaultProfile::default()
            },
            ModelPreset::PremiumLike => FaultProfile {
                p_code_fence: 0.12,
                p_key_translation: 0.08,
                p_utf8_corruption: 0.015,
                p_word_length_violation: 0.2,
                p_hint_contains_word: 0.05,
                p_language_drift: 0.05,
                p_repeat_word: 0.3,
                p_hint_repetition: 0.0,
                degradation_onset_turn: 5,
                degradation_increment: 0.1,
                p_field_malformed: 0.0,
                retry_compliance_factor: 0.5,
                per_token_latency_ms: 33.0,
            },
            ModelPreset::Perfect => FaultProfile::perfect(),
            ModelPreset::Hostile => FaultProfile {
                p_code_fence: 1.0,
                p_key_translation: 1.0,
                p_utf8_corruption: 1.0,
                p_word_length_violation: 1.0,
                p_hint_contains_word: 1.0,
                p_language_drift: 1.0,
                p_repeat_word: 1.0,
                p_hint_repetition: 1.0,
                degradation_onset_turn: 1,
                degradation_increment: 0.0,
                p_field_malformed: 1.0,
                retry_compliance_factor: 1.0,
                per_token_latency_ms: 29.0,
            },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelPreset::CompactLike => "compact_like",
            ModelPreset::PremiumLike => "premium_like",
            ModelPreset::Perfect => "perfect",
            ModelPreset::Hostile => "hostile",
        }
    }
}

/// Probability that all `n` independently malformable fields of a schema are
/// well-formed: `(1 - p)^n`.
pub fn field_success_probability(p: f64, n: usize) -> f64 {
    (1.0 - p).powi(n as i32)
}

#[derive(Debug, Clone)]
struct PendingFeedback {
    kind: FailureKind,
    exclusion_clause_present: bool,
}

#[derive(Debug, Clone)]
struct OpenSession {
    id: u64,
    #[allow(dead_code)]
    system_prompt: String,
    turns_used: u32,
    word_history: Vec<String>,
    hint_history: Vec<String>,
    pending_feedback: Option<PendingFeedback>,
}

/// The fault-injecting engine. One open session, one in-flight generate;
/// calls from multiple threads must be externally serialized.
#[derive(Debug)]
pub struct SimulatedEngine {
    profile: FaultProfile,
    rng: ChaCha8Rng,
    session: Option<OpenSession>,
    next_session_id: u64,
    latency_ms_total: u64,
    ready: bool,
}

impl SimulatedEngine {
    pub fn new(profile: FaultProfile, seed: u64) -> Self {
        SimulatedEngine {
            profile,
            rng: ChaCha8Rng::seed_from_u64(seed),
            session: None,
            next_session_id: 0,
            latency_ms_total: 0,
            ready: true,
        }
    }

    pub fn from_preset(preset: ModelPreset, seed: u64) -> Self {
        SimulatedEngine::new(preset.profile(), seed)
    }

    pub fn profile(&self) -> &FaultProfile {
        &self.profile
    }

    pub fn set_ready(&mut self, ready: bool) {
        self.ready = ready;
    }

    fn open_session_mut(&mut self, handle: SessionHandle) -> Result<&mut OpenSession, EngineError> {
        match self.session.as_mut() {
            Some(s) if s.id == handle.id => Ok(s),
            _ => Err(EngineError::ClosedSession),
        }
    }
}

/// Fault probabilities effective for one call, after degradation and retry
/// feedback adjustments.
#[derive(Debug, Clone, Copy, PartialEq)]
struct EffectiveProbs {
    word_length: f64,
    hint_contains: f64,
    repeat_word: f64,
    hint_repetition: f64,
}

/// Degradation adds `increment * (turn - onset)` to the repetition faults
/// once the turn number passes the onset, capped at 1. Retry feedback
/// multiplies the rejected kind's probability for this call only.
fn effective_probs(
    profile: &FaultProfile,
    turn: u32,
    feedback: Option<&PendingFeedback>,
) -> EffectiveProbs {
    let extra = if turn > profile.degradation_onset_turn {
        profile.degradation_increment * f64::from(turn - profile.degradation_onset_turn)
    } else {
        0.0
    };
    let mut probs = EffectiveProbs {
        word_length: profile.p_word_length_violation,
        hint_contains: profile.p_hint_contains_word,
        repeat_word: (profile.p_repeat_word + extra).min(1.0),
        hint_repetition: (profile.p_hint_repetition + extra).min(1.0),
    };
    if let Some(fb) = feedback {
        let factor = profile.retry_compliance_factor;
        match fb.kind {
            FailureKind::WordLength => probs.word_length *= factor,
            FailureKind::HintContainsWord => probs.hint_contains *= factor,
            FailureKind::WordRepeated => probs.repeat_word *= factor,
            _ => {}
        }
    }
    probs
}

const CONSONANTS: [char; 12] = ['b', 'c', 'd', 'f', 'g', 'l', 'm', 'n', 'p', 'r', 's', 't'];
const VOWELS: [char; 5] = ['a', 'e', 'i', 'o', 'u'];

fn synthesize_word(rng: &mut ChaCha8Rng, length: usize) -> String {
    (0..length)
        .map(|i| {
            if i % 2 == 0 {
                CONSONANTS[rng.gen_range(0..CONSONANTS.len())]
            } else {
                VOWELS[rng.gen_range(0..VOWELS.len())]
            }
        })
        .collect()
}

struct HintTemplates {
    generic: [&'static str; 6],
    first_letter: &'static str,
    last_letter: &'static str,
    second_letter: &'static str,
    contains_word: &'static str,
    categories: [&'static str; 3],
}

static PT_TEMPLATES: HintTemplates = HintTemplates {
    generic: [
        "Esta presente no dia a dia",
        "Muitas pessoas conhecem isso",
        "Pode aparecer em casa ou na rua",
        "Nao e dificil de encontrar",
        "Faz parte do vocabulario comum",
        "Criancas costumam aprender cedo",
    ],
    first_letter: "Comeca com a letra",
    last_letter: "Termina com a letra",
    second_letter: "A segunda letra e",
    contains_word: "Um {word} e algo comum de ver",
    categories: ["animais", "objetos", "natureza"],
};

static ES_TEMPLATES: HintTemplates = HintTemplates {
    generic: [
        "Esta presente en el dia a dia",
        "Mucha gente conoce esto",
        "Puede aparecer en casa o en la calle",
        "No es dificil de encontrar",
        "Forma parte del vocabulario comun",
        "Los ninos suelen aprenderlo pronto",
    ],
    first_letter: "Empieza con la letra",
    last_letter: "Termina con la letra",
    second_letter: "La segunda letra es",
    contains_word: "Un {word} es algo comun de ver",
    categories: ["animales", "objetos", "naturaleza"],
};

static EN_TEMPLATES: HintTemplates = HintTemplates {
    generic: [
        "It is present in everyday life",
        "Many people know this",
        "It can appear at home or on the street",
        "It is not hard to find",
        "It is part of common vocabulary",
        "Children usually learn it early",
    ],
    first_letter: "It starts with the letter",
    last_letter: "It ends with the letter",
    second_letter: "The second letter is",
    contains_word: "A {word} is a common thing to see",
    categories: ["animals", "objects", "nature"],
};

fn templates_for(language: &str) -> &'static HintTemplates {
    match language {
        "pt" => &PT_TEMPLATES,
        "es" => &ES_TEMPLATES,
        _ => &EN_TEMPLATES,
    }
}

/// A rendered JSON value slot; `corrupted` slots are emitted with broken
/// syntax (bare unquoted tokens).
enum FieldValue {
    Str(String),
    Num(i64),
    StrArray(Vec<String>, Vec<bool>),
}

fn render_document(fields: &[(String, FieldValue, bool)]) -> String {
    let mut out = String::from("{");
    for (i, (key, value, corrupted)) in fields.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push('"');
        out.push_str(key);
        out.push_str("\": ");
        match value {
            FieldValue::Str(s) => {
                if *corrupted {
                    out.push_str(s);
                } else {
                    out.push_str(&serde_json::to_string(s).unwrap());
                }
            }
            FieldValue::Num(n) => {
                if *corrupted {
                    out.push_str(&format!("{n}x"));
                } else {
                    out.push_str(&n.to_string());
                }
            }
            FieldValue::StrArray(items, item_corruption) => {
                if *corrupted {
                    // The whole array slot malformed: elements spill out
                    // without brackets or quotes.
                    out.push_str(&items.join(", "));
                } else {
                    out.push('[');
                    for (j, item) in items.iter().enumerate() {
                        if j > 0 {
                            out.push_str(", ");
                        }
                        if item_corruption.get(j).copied().unwrap_or(false) {
                            out.push_str(item);
                        } else {
                            out.push_str(&serde_json::to_string(item).unwrap());
                        }
                    }
                    out.push(']');
                }
            }
        }
    }
    out.push('}');
    out
}

fn translated_key(key: &str, language: &str) -> String {
    let translated = match (key, language) {
        ("word", "pt") | ("word", "es") => "palabra",
        ("hints", "pt") => "dicas",
        ("hints", "es") => "pistas",
        ("category", "pt") | ("category", "es") => "categoria",
        ("difficulty", "pt") => "dificuldade",
        ("difficulty", "es") => "dificultad",
        ("rarity", "pt") => "raridade",
        ("rarity", "es") => "rareza",
        (other, _) => other,
    };
    translated.to_string()
}

fn token_estimate(text: &str) -> u64 {
    (text.chars().count() as u64).div_ceil(4).max(1)
}

impl ModelEngine for SimulatedEngine {
    fn is_ready(&self) -> bool {
        self.ready
    }

    fn create_session(&mut self, system_prompt: &str) -> Result<SessionHandle, EngineError> {
        if !self.ready {
            return Err(EngineError::NotReady);
        }
        if self.session.is_some() {
            return Err(EngineError::Busy);
        }
        let id = self.next_session_id;
        self.next_session_id += 1;
        self.session = Some(OpenSession {
            id,
            system_prompt: system_prompt.to_string(),
            turns_used: 0,
            word_history: Vec::new(),
            hint_history: Vec::new(),
            pending_feedback: None,
        });
        Ok(SessionHandle { id })
    }

    fn generate(
        &mut self,
        handle: SessionHandle,
        _user_prompt: &str,
        intent: &GenerationIntent,
    ) -> Result<RawModelOutput, EngineError> {
        self.open_session_mut(handle)?;
        let profile = self.profile.clone();
        let session = self.session.as_mut().expect("session checked above");
        let turn = session.turns_used + 1;
        let feedback = session.pending_feedback.take();
        let probs = effective_probs(&profile, turn, feedback.as_ref());

        let schema = match intent {
            GenerationIntent::Puzzle { schema, .. } => *schema,
            GenerationIntent::Hints { .. } => SchemaVariant::HintsOnlyDay5,
        };
        let language = match intent {
            GenerationIntent::Puzzle { language, .. } => language.clone(),
            GenerationIntent::Hints { language, .. } => language.clone(),
        };
        let hint_count = schema.expected_hint_count();

        // Word selection (word first so hints can reference it).
        let word: String = match intent {
            GenerationIntent::Hints { word, .. } => word.clone(),
            GenerationIntent::Puzzle {
                min_len,
                max_len,
                exclusions,
                ..
            } => {
                let last_word = session.word_history.last().cloned();
                let reemit = match &feedback {
                    Some(fb) if !fb.exclusion_clause_present && last_word.is_some() => {
                        // Without an explicit exclusion the model often just
                        // produces the rejected word again.
                        self.rng.gen::<f64>() < profile.p_repeat_word
                    }
                    _ => false,
                };
                if reemit {
                    last_word.unwrap()
                } else if !session.word_history.is_empty()
                    && self.rng.gen::<f64>() < probs.repeat_word
                {
                    let idx = self.rng.gen_range(0..session.word_history.len());
                    session.word_history[idx].clone()
                } else {
                    let target_len = if min_len == max_len {
                        *min_len
                    } else {
                        self.rng.gen_range(*min_len..=*max_len)
                    };
                    let length = if self.rng.gen::<f64>() < probs.word_length {
                        let delta = self.rng.gen_range(1..=2usize);
                        if self.rng.gen::<bool>() && target_len > delta + 1 {
                            target_len - delta
                        } else {
                            target_len + delta
                        }
                    } else {
                        target_len
                    };
                    let mut candidate = synthesize_word(&mut self.rng, length);
                    for _ in 0..32 {
                        let taken = exclusions.iter().any(|e| e == &candidate)
                            || session.word_history.contains(&candidate);
                        if !taken {
                            break;
                        }
                        candidate = synthesize_word(&mut self.rng, length);
                    }
                    candidate
                }
            }
        };

        // Scalar companions for the richer schemas.
        let is_puzzle_intent = matches!(intent, GenerationIntent::Puzzle { .. });
        let templates_requested = templates_for(&language);
        let (category, difficulty, rarity) = if is_puzzle_intent && schema.requires_category() {
            let cat = templates_requested.categories
                [self.rng.gen_range(0..templates_requested.categories.len())];
            let diff = self.rng.gen_range(1..=5i64);
            let rarity = if schema == SchemaVariant::FullPuzzleDay1 {
                Some(["common", "uncommon", "rare"][self.rng.gen_range(0..3)].to_string())
            } else {
                None
            };
            (Some(cat.to_string()), Some(diff), rarity)
        } else {
            (None, None, None)
        };

        // Hints: language drift falls back to English templates.
        let drifted = self.rng.gen::<f64>() < profile.p_language_drift;
        let hint_templates = if drifted {
            templates_for("en")
        } else {
            templates_requested
        };
        let mut generic_indices: Vec<usize> = (0..hint_templates.generic.len()).collect();
        for i in (1..generic_indices.len()).rev() {
            let j = self.rng.gen_range(0..=i);
            generic_indices.swap(i, j);
        }
        // A compliant model honors "do NOT include the word in any hint";
        // templates that happen to contain the word are skipped. Letter
        // hints quote single characters and cannot collide.
        let normalized_word = crate::validator::normalize_word(&word);
        let mut generics = generic_indices
            .iter()
            .map(|&i| hint_templates.generic[i])
            .filter(|t| {
                normalized_word.is_empty()
                    || !crate::validator::normalize_word(t).contains(&normalized_word)
            });
        let chars: Vec<char> = word.chars().collect();
        let first_char = chars.first().copied().unwrap_or('a');
        let last_char = chars.last().copied().unwrap_or('a');
        let second_char = chars.get(1).copied().unwrap_or('a');
        let mut next_generic = |fallback: &'static str, c: char| -> String {
            generics
                .next()
                .map(str::to_string)
                .unwrap_or_else(|| format!("{fallback} \"{c}\""))
        };
        let mut hints: Vec<String> = Vec::with_capacity(hint_count);
        hints.push(next_generic(hint_templates.second_letter, second_char));
        if hint_count >= 5 {
            hints.push(next_generic(hint_templates.second_letter, second_char));
        }
        hints.push(format!(
            "{} \"{}\"",
            hint_templates.first_letter, first_char
        ));
        hints.push(format!("{} \"{}\"", hint_templates.last_letter, last_char));
        while hints.len() < hint_count {
            hints.push(next_generic(hint_templates.second_letter, second_char));
        }
        hints.truncate(hint_count);

        if self.rng.gen::<f64>() < probs.hint_contains {
            let idx = self.rng.gen_range(0..hints.len());
            hints[idx] = hint_templates.contains_word.replace("{word}", &word);
        }
        if !session.hint_history.is_empty() {
            for hint in hints.iter_mut() {
                if self.rng.gen::<f64>() < probs.hint_repetition {
                    let idx = self.rng.gen_range(0..session.hint_history.len());
                    *hint = session.hint_history[idx].clone();
                }
            }
        }

        // Per-field syntax corruption: one independent draw per schema field.
        let corrupt: Vec<bool> = (0..schema.field_count())
            .map(|_| self.rng.gen::<f64>() < profile.p_field_malformed)
            .collect();

        let translate = self.rng.gen::<f64>() < profile.p_key_translation;
        let key = |name: &str| {
            if translate {
                translated_key(name, &language)
            } else {
                name.to_string()
            }
        };

        // Slot layout per schema: scalars first, then hints. Day-1 and Day-2
        // schemas corrupt leading hint elements individually; the compact
        // schemas treat the hint array as a single slot.
        let mut fields: Vec<(String, FieldValue, bool)> = Vec::new();
        match schema {
            SchemaVariant::FullPuzzleDay1 => {
                let hint_corruption = vec![corrupt[4], corrupt[5], corrupt[6], false, false];
                fields.push((key("word"), FieldValue::Str(word.clone()), corrupt[0]));
                fields.push((
                    key("category"),
                    FieldValue::Str(category.clone().unwrap_or_default()),
                    corrupt[1],
                ));
                fields.push((
                    key("difficulty"),
                    FieldValue::Num(difficulty.unwrap_or(1)),
                    corrupt[2],
                ));
                fields.push((
                    key("rarity"),
                    FieldValue::Str(rarity.unwrap_or_default()),
                    corrupt[3],
                ));
                fields.push((
                    key("hints"),
                    FieldValue::StrArray(hints.clone(), hint_corruption),
                    false,
                ));
            }
            SchemaVariant::CorePuzzleDay2 => {
                let hint_corruption = vec![corrupt[3], corrupt[4], false];
                fields.push((key("word"), FieldValue::Str(word.clone()), corrupt[0]));
                fields.push((
                    key("category"),
                    FieldValue::Str(category.clone().unwrap_or_default()),
                    corrupt[1],
                ));
                fields.push((
                    key("difficulty"),
                    FieldValue::Num(difficulty.unwrap_or(1)),
                    corrupt[2],
                ));
                fields.push((
                    key("hints"),
                    FieldValue::StrArray(hints.clone(), hint_corruption),
                    false,
                ));
            }
            SchemaVariant::WordAndHintsDay3 => {
                fields.push((key("word"), FieldValue::Str(word.clone()), corrupt[0]));
                fields.push((
                    key("hints"),
                    FieldValue::StrArray(hints.clone(), Vec::new()),
                    corrupt[1],
                ));
            }
            SchemaVariant::HintsOnlyDay5 => {
                fields.push((
                    key("hints"),
                    FieldValue::StrArray(hints.clone(), Vec::new()),
                    corrupt[0],
                ));
            }
        }

        let mut text = render_document(&fields);

        if self.rng.gen::<f64>() < profile.p_code_fence {
            text = format!("```json\n{text}\n```");
        }
        if self.rng.gen::<f64>() < profile.p_utf8_corruption {
            let chars: Vec<char> = text.chars().collect();
            let pos = self.rng.gen_range(0..=chars.len());
            let mut corrupted: String = chars[..pos].iter().collect();
            corrupted.push('\u{FFFD}');
            corrupted.extend(&chars[pos..]);
            text = corrupted;
        }

        let latency = (profile.per_token_latency_ms * token_estimate(&text) as f64).round() as u64;
        self.latency_ms_total += latency;

        let session = self.session.as_mut().expect("session checked above");
        session.turns_used += 1;
        let turn_index = session.turns_used - 1;
        if is_puzzle_intent {
            session.word_history.push(word);
        }
        session.hint_history.extend(hints);

        Ok(RawModelOutput {
            text,
            session_id: session.id,
            turn_index,
        })
    }

    fn apply_retry_feedback(
        &mut self,
        handle: SessionHandle,
        kind: FailureKind,
        exclusion_clause_present: bool,
    ) -> Result<(), EngineError> {
        let session = self.open_session_mut(handle)?;
        session.pending_feedback = Some(PendingFeedback {
            kind,
            exclusion_clause_present,
        });
        Ok(())
    }

    fn close_session(&mut self, handle: SessionHandle) -> Result<(), EngineError> {
        match self.session.as_ref() {
            Some(s) if s.id == handle.id => {
                self.session = None;
                Ok(())
            }
            _ => Err(EngineError::ClosedSession),
        }
    }

    fn simulated_latency_ms(&self) -> u64 {
        self.latency_ms_total
    }
}
