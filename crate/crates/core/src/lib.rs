//! puzzlesmith: a resilience toolkit for consuming structured output from
//! small language models.
//!
//! Small on-device models wrap JSON in markdown fences, translate keys into
//! the output language, miscount letters, repeat themselves as their context
//! fills up, and sometimes emit garbage. This crate packages the defenses
//! that make such a model usable in production:
//!
//! - [`parser`]: a multi-layer defensive parsing pipeline
//! - [`validator`]: configurable constraint rule sets with typed rejections
//! - [`prompts`]: prompt templates, retry feedback, and language handling
//! - [`wordlists`]: curated word assets with CI-style validation
//! - [`orchestrator`]: the retry/rotation/fallback generation loop
//! - [`simulator`]: a seeded fault-injecting mock engine
//! - [`experiment`]: seeded Monte-Carlo runs that quantify each mitigation
//!
//! The simulator reproduces the failure taxonomy of on-device generation
//! (format violations, constraint violations, context degradation, simulated
//! latency, per-model variance) so the effect of every mitigation is
//! measurable at desk scale without a real model.

pub mod config;
pub mod engine;
pub mod experiment;
pub mod orchestrator;
pub mod parser;
pub mod prompts;
pub mod report;
pub mod simulator;
pub mod validator;
pub mod wordlists;

pub use config::{ConfigError, ExperimentConfig, StrategyToggles};
pub use engine::{EngineError, GenerationIntent, ModelEngine, RawModelOutput, SessionHandle};
pub use experiment::{
    run_experiment, run_experiment_parallel, run_experiment_with, ExperimentError,
};
pub use orchestrator::{
    fallback_hints, generate_batch, generate_one, replenishment_gate, FileUsedWords,
    GenerationConfig, GenerationMode, InMemoryUsedWords, Level, Puzzle, PuzzleSource,
    UsedWordStore,
};
pub use parser::{parse, ParseFailure, ParseOutcome, ParseStrategy, ParsedPuzzle};
pub use prompts::{LanguageSpec, PromptPair, RewriteGeneration};
pub use report::{emit_report, ExperimentReport, GenerationReport, ReportFormat};
pub use simulator::{field_success_probability, FaultProfile, ModelPreset, SimulatedEngine};
pub use validator::{
    is_repeat, normalize_word, validate, FailureKind, SchemaVariant, ValidationFailure,
    ValidationRuleSet,
};
pub use wordlists::{load_word_list, select_word, validate_word_list, WordList, WordSelection};
