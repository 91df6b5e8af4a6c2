//! Experiment configuration: a single JSON document with fail-loud parsing.
//! Unknown keys are an error.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::orchestrator::{
    default_levels, GenerationConfig, GenerationMode, Level, DEFAULT_MAX_ATTEMPTS_PER_ITEM,
    DEFAULT_SESSION_ROTATION,
};
use crate::prompts::{LanguageSpec, RewriteGeneration};
use crate::report::ReportFormat;
use crate::simulator::{FaultProfile, ModelPreset};
use crate::validator::SchemaVariant;

/// Per-strategy on/off switches for A/B experiments. All on by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyToggles {
    pub defensive_parsing: bool,
    pub contextual_retry: bool,
    pub session_rotation: bool,
    pub fallback: bool,
}

impl Default for StrategyToggles {
    fn default() -> Self {
        StrategyToggles {
            defensive_parsing: true,
            contextual_retry: true,
            session_rotation: true,
            fallback: true,
        }
    }
}

fn default_trials() -> u64 {
    1
}

fn default_count() -> usize {
    25
}

fn default_language() -> String {
    "pt".to_string()
}

fn default_format() -> ReportFormat {
    ReportFormat::Json
}

/// A complete experiment description, loadable from one JSON document.
///
/// Exactly one of `preset` / `profile` selects the fault model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_trials")]
    pub trials: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<ModelPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<FaultProfile>,
    pub mode: GenerationMode,
    pub schema: SchemaVariant,
    #[serde(default)]
    pub strategy_toggles: StrategyToggles,
    /// Puzzles per trial.
    #[serde(default = "default_count")]
    pub count: usize,
    /// `[word_length, batch_size]` pairs; defaults to the shipped levels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_rotation: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_attempts_per_item: Option<usize>,
    #[serde(default = "default_language")]
    pub language: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_rewrite: Option<RewriteGeneration>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub wordlist_paths: BTreeMap<String, PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("config error: {0}")]
pub struct ConfigError(pub String);

impl ExperimentConfig {
    /// Parses and validates a JSON config document.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// A curated-mode baseline with every strategy enabled.
    pub fn baseline(seed: u64) -> Self {
        ExperimentConfig {
            trials: 1,
            seed,
            preset: Some(ModelPreset::CompactLike),
            profile: None,
            mode: GenerationMode::CuratedWordLlmHints,
            schema: SchemaVariant::HintsOnlyDay5,
            strategy_toggles: StrategyToggles::default(),
            count: default_count(),
            levels: None,
            session_rotation: None,
            max_attempts_per_item: None,
            language: default_language(),
            prompt_rewrite: None,
            wordlist_paths: BTreeMap::new(),
            output_path: None,
            format: ReportFormat::Json,
        }
    }

    pub fn fault_profile(&self) -> Result<FaultProfile, ConfigError> {
        let profile = match (&self.preset, &self.profile) {
            (Some(preset), None) => preset.profile(),
            (None, Some(profile)) => profile.clone(),
            (Some(_), Some(_)) => {
                return Err(ConfigError(
                    "give either a preset or an explicit profile, not both".to_string(),
                ))
            }
            (None, None) => {
                return Err(ConfigError(
                    "a preset or an explicit profile is required".to_string(),
                ))
            }
        };
        profile.validate().map_err(ConfigError)?;
        Ok(profile)
    }

    pub fn resolved_levels(&self) -> Vec<Level> {
        match &self.levels {
            Some(pairs) => pairs
                .iter()
                .map(|&(word_length, batch_size)| Level {
                    word_length,
                    batch_size,
                })
                .collect(),
            None => default_levels(),
        }
    }

    fn resolved_prompt_rewrite(&self) -> Result<RewriteGeneration, ConfigError> {
        let default = match self.mode {
            GenerationMode::CuratedWordLlmHints => RewriteGeneration::Day5HintOnly,
            GenerationMode::LlmWordAndHints => RewriteGeneration::Day4LanguageNames,
            GenerationMode::LlmFullPuzzle => RewriteGeneration::Day2,
        };
        let rewrite = self.prompt_rewrite.unwrap_or(default);
        let curated = self.mode == GenerationMode::CuratedWordLlmHints;
        if curated && rewrite != RewriteGeneration::Day5HintOnly {
            return Err(ConfigError(
                "curated mode requires the day5_hint_only prompt".to_string(),
            ));
        }
        if !curated && rewrite == RewriteGeneration::Day5HintOnly {
            return Err(ConfigError(
                "day5_hint_only prompts only fit curated mode".to_string(),
            ));
        }
        Ok(rewrite)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials < 1 {
            return Err(ConfigError("trials must be >= 1".to_string()));
        }
        if self.count < 1 {
            return Err(ConfigError("count must be >= 1".to_string()));
        }
        self.fault_profile()?;
        let schema_ok = match self.mode {
            GenerationMode::LlmFullPuzzle => matches!(
                self.schema,
                SchemaVariant::FullPuzzleDay1 | SchemaVariant::CorePuzzleDay2
            ),
            GenerationMode::LlmWordAndHints => self.schema == SchemaVariant::WordAndHintsDay3,
            GenerationMode::CuratedWordLlmHints => self.schema == SchemaVariant::HintsOnlyDay5,
        };
        if !schema_ok {
            return Err(ConfigError(format!(
                "schema {} does not fit the selected mode",
                self.schema.name()
            )));
        }
        self.resolved_prompt_rewrite()?;
        let levels = self.resolved_levels();
        if levels.is_empty() {
            return Err(ConfigError("levels must not be empty".to_string()));
        }
        for level in &levels {
            if level.word_length < 2 || level.batch_size < 1 {
                return Err(ConfigError(format!(
                    "invalid level (word_length {}, batch_size {})",
                    level.word_length, level.batch_size
                )));
            }
        }
        if self.session_rotation == Some(0) {
            return Err(ConfigError("session_rotation must be >= 1".to_string()));
        }
        if self.max_attempts_per_item == Some(0) {
            return Err(ConfigError(
                "max_attempts_per_item must be >= 1".to_string(),
            ));
        }
        LanguageSpec::new(&self.language).map_err(|e| ConfigError(e.to_string()))?;
        Ok(())
    }

    /// Builds the per-trial generation config. Toggles are folded in here:
    /// disabling session rotation makes the chunk span the whole level batch.
    pub fn generation_config(&self, trial_seed: u64) -> Result<GenerationConfig, ConfigError> {
        let language = LanguageSpec::new(&self.language).map_err(|e| ConfigError(e.to_string()))?;
        let session_rotation = if self.strategy_toggles.session_rotation {
            self.session_rotation.unwrap_or(DEFAULT_SESSION_ROTATION)
        } else {
            usize::MAX
        };
        Ok(GenerationConfig {
            mode: self.mode,
            schema: self.schema,
            levels: self.resolved_levels(),
            session_rotation,
            max_attempts_per_item: self
                .max_attempts_per_item
                .unwrap_or(DEFAULT_MAX_ATTEMPTS_PER_ITEM),
            language,
            seed: trial_seed,
            prompt_rewrite: self.resolved_prompt_rewrite()?,
            defensive_parsing: self.strategy_toggles.defensive_parsing,
            contextual_retry: self.strategy_toggles.contextual_retry,
            fallback: self.strategy_toggles.fallback,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "seed": 42,
        "preset": "compact_like",
        "mode": "curated_word_llm_hints",
        "schema": "hints_only_day5"
    }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let config = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(config.trials, 1);
        assert_eq!(config.count, 25);
        assert_eq!(config.language, "pt");
        assert!(config.strategy_toggles.defensive_parsing);
        let generation = config.generation_config(7).unwrap();
        assert_eq!(generation.session_rotation, 5);
        assert_eq!(generation.max_attempts_per_item, 3);
        assert_eq!(generation.prompt_rewrite, RewriteGeneration::Day5HintOnly);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"seed": 1, "preset": "perfect", "mode": "curated_word_llm_hints",
                       "schema": "hints_only_day5", "surprise": true}"#;
        let err = ExperimentConfig::from_json(text).unwrap_err();
        assert!(err.0.contains("surprise"));
    }

    #[test]
    fn preset_and_profile_are_mutually_exclusive() {
        let text = r#"{"seed": 1, "preset": "perfect", "profile": {},
                       "mode": "curated_word_llm_hints", "schema": "hints_only_day5"}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
        let text = r#"{"seed": 1, "mode": "curated_word_llm_hints", "schema": "hints_only_day5"}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }

    #[test]
    fn mode_schema_coherence_is_enforced() {
        let text = r#"{"seed": 1, "preset": "perfect", "mode": "curated_word_llm_hints",
                       "schema": "full_puzzle_day1"}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
        let text = r#"{"seed": 1, "preset": "perfect", "mode": "llm_full_puzzle",
                       "schema": "hints_only_day5"}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }

    #[test]
    fn rotation_toggle_disables_chunking() {
        let mut config = ExperimentConfig::from_json(MINIMAL).unwrap();
        config.strategy_toggles.session_rotation = false;
        let generation = config.generation_config(1).unwrap();
        assert_eq!(generation.session_rotation, usize::MAX);
    }

    #[test]
    fn profile_probabilities_are_validated() {
        let text = r#"{"seed": 1, "profile": {"p_code_fence": 1.7},
                       "mode": "curated_word_llm_hints", "schema": "hints_only_day5"}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }

    #[test]
    fn levels_override_round_trips() {
        let text = r#"{"seed": 1, "preset": "perfect", "mode": "llm_word_and_hints",
                       "schema": "word_and_hints_day3", "levels": [[5, 10]]}"#;
        let config = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(
            config.resolved_levels(),
            vec![Level {
                word_length: 5,
                batch_size: 10
            }]
        );
    }

    #[test]
    fn config_echo_round_trips_through_json() {
        let config = ExperimentConfig::from_json(MINIMAL).unwrap();
        let json = serde_json::to_string(&config).unwrap();
        let reloaded = ExperimentConfig::from_json(&json).unwrap();
        assert_eq!(config, reloaded);
    }
}
