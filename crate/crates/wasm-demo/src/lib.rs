//! Browser bindings for the puzzlesmith toolkit.
//!
//! Three interactive operations back the demo page: the defensive parse
//! playground, seeded fault-simulation runs, and the field-count success
//! curve. All inputs and outputs cross the boundary as JSON strings to keep
//! the binding surface small.

use wasm_bindgen::prelude::*;

use puzzlesmith::config::ExperimentConfig;
use puzzlesmith::experiment::run_experiment_with;
use puzzlesmith::simulator::{field_success_probability, ModelPreset, SimulatedEngine};
use puzzlesmith::validator::SchemaVariant;
use puzzlesmith::wordlists::load_word_list;
use puzzlesmith::{parser, ModelEngine, RawModelOutput, WordList};

fn schema_from_name(name: &str) -> Result<SchemaVariant, String> {
    match name {
        "full_puzzle_day1" => Ok(SchemaVariant::FullPuzzleDay1),
        "core_puzzle_day2" => Ok(SchemaVariant::CorePuzzleDay2),
        "word_and_hints_day3" => Ok(SchemaVariant::WordAndHintsDay3),
        "hints_only_day5" => Ok(SchemaVariant::HintsOnlyDay5),
        other => Err(format!("unknown schema \"{other}\"")),
    }
}

fn bundled_wordlist(language: &str) -> Result<WordList, String> {
    let bytes: &[u8] = match language {
        "pt" => include_bytes!("../../../wordlists/words_pt.json"),
        "en" => include_bytes!("../../../wordlists/words_en.json"),
        "es" => include_bytes!("../../../wordlists/words_es.json"),
        "it" => include_bytes!("../../../wordlists/words_it.json"),
        other => return Err(format!("no bundled word list for \"{other}\"")),
    };
    load_word_list(bytes).map_err(|e| e.to_string())
}

fn error_json(message: &str) -> String {
    serde_json::json!({ "ok": false, "error": message }).to_string()
}

/// Runs the defensive parsing pipeline over pasted model output and reports
/// the winning strategy or the per-layer diagnostics.
#[wasm_bindgen]
pub fn parse_text(text: &str, schema_name: &str) -> String {
    let schema = match schema_from_name(schema_name) {
        Ok(schema) => schema,
        Err(e) => return error_json(&e),
    };
    let raw = RawModelOutput {
        text: text.to_string(),
        session_id: 0,
        turn_index: 0,
    };
    match parser::parse(&raw, schema) {
        Ok(outcome) => serde_json::json!({
            "ok": true,
            "strategy": outcome.strategy.name(),
            "sanitized": outcome.sanitized,
            "payload": outcome.payload,
        })
        .to_string(),
        Err(failure) => serde_json::json!({
            "ok": false,
            "layers": failure.layers,
        })
        .to_string(),
    }
}

/// Runs a seeded experiment from a JSON config (same schema as the CLI
/// config file) against the bundled word lists and returns the full report.
#[wasm_bindgen]
pub fn run_simulation(config_json: &str) -> String {
    let config = match ExperimentConfig::from_json(config_json) {
        Ok(config) => config,
        Err(e) => return error_json(&e.to_string()),
    };
    let words = match bundled_wordlist(&config.language) {
        Ok(words) => words,
        Err(e) => return error_json(&e),
    };
    let profile = match config.fault_profile() {
        Ok(profile) => profile,
        Err(e) => return error_json(&e.to_string()),
    };
    let mut factory = |seed: u64| -> Box<dyn ModelEngine> {
        Box::new(SimulatedEngine::new(profile.clone(), seed))
    };
    match run_experiment_with(&config, &words, &mut factory) {
        Ok(report) => report.to_json(),
        Err(e) => error_json(&e.to_string()),
    }
}

/// Analytic well-formedness curve `(1-p)^n` for n = 0..=max_fields.
#[wasm_bindgen]
pub fn field_success_curve(p: f64, max_fields: u32) -> String {
    let points: Vec<serde_json::Value> = (0..=max_fields)
        .map(|n| {
            serde_json::json!({
                "fields": n,
                "predicted": field_success_probability(p, n as usize),
            })
        })
        .collect();
    serde_json::Value::Array(points).to_string()
}

/// The fault profile behind a named preset, for initializing the sliders.
#[wasm_bindgen]
pub fn preset_profile(name: &str) -> String {
    let preset = match name {
        "compact_like" => ModelPreset::CompactLike,
        "premium_like" => ModelPreset::PremiumLike,
        "perfect" => ModelPreset::Perfect,
        "hostile" => ModelPreset::Hostile,
        other => return error_json(&format!("unknown preset \"{other}\"")),
    };
    serde_json::to_string(&preset.profile()).expect("profile serialization cannot fail")
}
