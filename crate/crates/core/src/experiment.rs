//! Seeded multi-trial experiment execution.
//!
//! Each trial derives its own seed with a splitmix finalizer, owns a fresh
//! engine and used-word store, and runs one batch. Aggregation folds trial
//! reports in index order, so serial and parallel execution produce
//! identical results.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};
use crate::engine::ModelEngine;
use crate::orchestrator::{generate_batch, GenerateError, InMemoryUsedWords, Puzzle};
use crate::report::{emit_report, ExperimentReport, GenerationReport, TrialStats};
use crate::simulator::{field_success_probability, SimulatedEngine};
use crate::wordlists::{
    load_word_list, validate_word_list, WordList, WordListError, DEFAULT_MIN_PER_LENGTH,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("word list error: {0}")]
    WordList(String),
    #[error("generation error: {0}")]
    Generate(#[from] GenerateError),
    #[error("trial failed: {0}")]
    Trial(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// SplitMix64 finalizer; mixes the base seed with a trial index into an
/// independent, reproducible stream seed.
pub fn derive_trial_seed(seed: u64, trial_index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(trial_index)
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Loads the word list for the configured language from `wordlist_paths`,
/// when the mode needs one, and runs the CI checks on the level lengths.
pub fn load_configured_wordlist(config: &ExperimentConfig) -> Result<WordList, ExperimentError> {
    use crate::orchestrator::GenerationMode;
    if config.mode != GenerationMode::CuratedWordLlmHints {
        return Ok(WordList {
            language: config.language.clone(),
            words_by_length: BTreeMap::new(),
        });
    }
    let path = config.wordlist_paths.get(&config.language).ok_or_else(|| {
        ExperimentError::Config(ConfigError(format!(
            "curated mode needs a wordlist path for language \"{}\"",
            config.language
        )))
    })?;
    let bytes = std::fs::read(path)?;
    let list = load_word_list(&bytes).map_err(|e: WordListError| {
        ExperimentError::WordList(format!("{}: {e}", path.display()))
    })?;
    let mins: BTreeMap<usize, usize> = config
        .resolved_levels()
        .iter()
        .map(|level| (level.word_length, DEFAULT_MIN_PER_LENGTH))
        .collect();
    let violations = validate_word_list(&list, &mins);
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(ExperimentError::WordList(lines.join("; ")));
    }
    Ok(list)
}

fn run_trial(
    config: &ExperimentConfig,
    words: &WordList,
    engine: &mut dyn ModelEngine,
    trial_index: u64,
    trial_seed: u64,
) -> Result<(TrialStats, GenerationReport, Vec<Puzzle>), ExperimentError> {
    let generation = config.generation_config(trial_seed)?;
    let mut used = InMemoryUsedWords::new();
    let (puzzles, report) = generate_batch(
        config.count,
        &generation,
        engine,
        words,
        &mut used,
        0,
        &mut |_, _| {},
    )?;
    let stats = TrialStats {
        trial_index,
        seed: trial_seed,
        requested: report.requested,
        produced: report.produced,
        attempts_total: report.attempts_total,
        parse_successes: report.parse_successes(),
        violations_total: report.violations_total(),
        fallback_used: report.fallback_used,
        sessions_opened: report.sessions_opened,
        well_formed_outputs: report.well_formed_outputs,
        duplicate_hint_puzzles: report.duplicate_hint_puzzles,
        simulated_latency_ms: report.simulated_latency_ms,
    };
    Ok((stats, report, puzzles))
}

fn assemble_report(
    config: &ExperimentConfig,
    per_trial: Vec<(TrialStats, GenerationReport)>,
) -> Result<ExperimentReport, ExperimentError> {
    let profile = config.fault_profile()?;
    let predicted =
        field_success_probability(profile.p_field_malformed, config.schema.field_count());
    let mut aggregate = GenerationReport::default();
    let mut trials = Vec::with_capacity(per_trial.len());
    for (stats, report) in per_trial {
        aggregate.absorb(&report);
        trials.push(stats);
    }
    Ok(ExperimentReport::from_trials(
        config.clone(),
        trials,
        aggregate,
        predicted,
    ))
}

/// Runs every trial sequentially with engines built by `factory` (one engine
/// per trial, seeded with the trial seed).
pub fn run_experiment_with(
    config: &ExperimentConfig,
    words: &WordList,
    factory: &mut dyn FnMut(u64) -> Box<dyn ModelEngine>,
) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    let mut per_trial = Vec::with_capacity(config.trials as usize);
    for trial_index in 0..config.trials {
        let trial_seed = derive_trial_seed(config.seed, trial_index);
        let mut engine = factory(trial_seed);
        let (stats, report, _) =
            run_trial(config, words, engine.as_mut(), trial_index, trial_seed)?;
        per_trial.push((stats, report));
    }
    assemble_report(config, per_trial)
}

/// Runs trials on `threads` worker threads, each trial with its own
/// simulator and RNG stream. Results are folded in trial order and are
/// identical to the sequential run.
pub fn run_experiment_parallel(
    config: &ExperimentConfig,
    words: &WordList,
    threads: usize,
) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    let profile = config.fault_profile()?;
    let threads = threads.max(1);
    let trials = config.trials;

    let mut slots: Vec<Option<Result<(TrialStats, GenerationReport), String>>> =
        Vec::with_capacity(trials as usize);
    slots.resize_with(trials as usize, || None);
    let slots = std::sync::Mutex::new(slots);
    let next = std::sync::atomic::AtomicU64::new(0);

    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let trial_index = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if trial_index >= trials {
                    break;
                }
                let trial_seed = derive_trial_seed(config.seed, trial_index);
                let mut engine = SimulatedEngine::new(profile.clone(), trial_seed);
                let result = run_trial(config, words, &mut engine, trial_index, trial_seed)
                    .map(|(stats, report, _)| (stats, report))
                    .map_err(|e| e.to_string());
                slots.lock().expect("trial mutex poisoned")[trial_index as usize] = Some(result);
            });
        }
    });

    let mut per_trial = Vec::with_capacity(trials as usize);
    for slot in slots.into_inner().expect("trial mutex poisoned") {
        let result = slot.expect("every trial index was claimed");
        per_trial.push(result.map_err(ExperimentError::Trial)?);
    }
    assemble_report(config, per_trial)
}

/// Loads word lists, runs the configured trials sequentially on the
/// simulator, writes the report when an output path is configured, and
/// returns it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    let words = load_configured_wordlist(config)?;
    let profile = config.fault_profile()?;
    let mut factory = |seed: u64| -> Box<dyn ModelEngine> {
        Box::new(SimulatedEngine::new(profile.clone(), seed))
    };
    let report = run_experiment_with(config, &words, &mut factory)?;
    if let Some(path) = &config.output_path {
        emit_report(&report, config.format, path)?;
    }
    Ok(report)
}
