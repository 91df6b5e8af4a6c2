//! Command-line experiment harness.
//!
//! Exit codes: 0 success, 1 domain failure (parse or validation), 2 usage
//! or config error.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use puzzlesmith::config::ExperimentConfig;
use puzzlesmith::experiment::{self, ExperimentError};
use puzzlesmith::parser;
use puzzlesmith::report::{render_report, ReportFormat};
use puzzlesmith::validator::SchemaVariant;
use puzzlesmith::wordlists::{self, DEFAULT_MIN_PER_LENGTH};
use puzzlesmith::RawModelOutput;

const EXIT_DOMAIN: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "puzzlesmith",
    about = "Defensive parsing, validation, and fault-simulation experiments for small-model structured output",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded experiment described by a JSON config file.
    Run {
        /// Path to the experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's trial count.
        #[arg(long)]
        trials: Option<u64>,
        /// Write the report here instead of the config's output_path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report format.
        #[arg(long)]
        format: Option<String>,
        /// Worker threads for trial execution.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Parse a file of model output and print the recovered payload.
    Parse {
        /// Schema variant to decode against.
        #[arg(long)]
        schema: String,
        /// File containing the raw model output.
        file: PathBuf,
    },
    /// Check a word-list asset for duplicates, charset, and minimum counts.
    ValidateWordlist {
        /// Word-list JSON file.
        file: PathBuf,
        /// Minimum words required per length bucket.
        #[arg(long, default_value_t = DEFAULT_MIN_PER_LENGTH)]
        min_per_length: usize,
    },
}

fn parse_schema(name: &str) -> Result<SchemaVariant, String> {
    match name {
        "full_puzzle_day1" => Ok(SchemaVariant::FullPuzzleDay1),
        "core_puzzle_day2" => Ok(SchemaVariant::CorePuzzleDay2),
        "word_and_hints_day3" => Ok(SchemaVariant::WordAndHintsDay3),
        "hints_only_day5" => Ok(SchemaVariant::HintsOnlyDay5),
        other => Err(format!(
            "unknown schema \"{other}\" (expected full_puzzle_day1, core_puzzle_day2, \
             word_and_hints_day3, or hints_only_day5)"
        )),
    }
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(EXIT_USAGE)
}

fn domain_error(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(EXIT_DOMAIN)
}

fn cmd_run(
    config_path: &PathBuf,
    seed: Option<u64>,
    trials: Option<u64>,
    out: Option<PathBuf>,
    format: Option<String>,
    threads: usize,
) -> ExitCode {
    let text = match std::fs::read_to_string(config_path) {
        Ok(text) => text,
        Err(e) => return usage_error(&format!("cannot read {}: {e}", config_path.display())),
    };
    let mut config = match ExperimentConfig::from_json(&text) {
        Ok(config) => config,
        Err(e) => return usage_error(&e.to_string()),
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(trials) = trials {
        config.trials = trials;
    }
    if let Some(out) = out {
        config.output_path = Some(out);
    }
    if let Some(format) = format {
        match format.parse::<ReportFormat>() {
            Ok(f) => config.format = f,
            Err(e) => return usage_error(&e),
        }
    }
    if let Err(e) = config.validate() {
        return usage_error(&e.to_string());
    }

    let report = if threads > 1 {
        let words = match experiment::load_configured_wordlist(&config) {
            Ok(words) => words,
            Err(e) => return classify_experiment_error(e),
        };
        match experiment::run_experiment_parallel(&config, &words, threads) {
            Ok(report) => report,
            Err(e) => return classify_experiment_error(e),
        }
    } else {
        match experiment::run_experiment(&config) {
            Ok(report) => report,
            Err(e) => return classify_experiment_error(e),
        }
    };

    // run_experiment writes only on the sequential path; cover the rest.
    if let Some(path) = &config.output_path {
        if let Err(e) = puzzlesmith::report::emit_report(&report, config.format, path) {
            return domain_error(&format!("cannot write {}: {e}", path.display()));
        }
        eprintln!("report written to {}", path.display());
    } else {
        print!("{}", render_report(&report, config.format));
    }
    eprintln!(
        "trials: {}  produced: {}/{}  parse_success_rate: {:.4}  fallback_rate: {:.4}",
        config.trials,
        report.aggregate.produced,
        report.aggregate.requested,
        report.parse_success_rate,
        report.fallback_rate,
    );
    ExitCode::SUCCESS
}

fn classify_experiment_error(e: ExperimentError) -> ExitCode {
    match e {
        ExperimentError::Config(e) => usage_error(&e.to_string()),
        other => domain_error(&other.to_string()),
    }
}

fn cmd_parse(schema_name: &str, file: &PathBuf) -> ExitCode {
    let schema = match parse_schema(schema_name) {
        Ok(schema) => schema,
        Err(e) => return usage_error(&e),
    };
    let text = match std::fs::read_to_string(file) {
        Ok(text) => text,
        Err(e) => return usage_error(&format!("cannot read {}: {e}", file.display())),
    };
    if text.trim().is_empty() {
        return domain_error("input file is empty");
    }
    let raw = RawModelOutput {
        text,
        session_id: 0,
        turn_index: 0,
    };
    match parser::parse(&raw, schema) {
        Ok(outcome) => {
            println!("strategy: {}", outcome.strategy.name());
            println!("sanitized: {}", outcome.sanitized);
            println!(
                "payload: {}",
                serde_json::to_string_pretty(&outcome.payload)
                    .expect("payload serialization cannot fail")
            );
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("parse failed; layer diagnostics:");
            for layer in &failure.layers {
                eprintln!("  {}: {}", layer.layer, layer.detail);
            }
            ExitCode::from(EXIT_DOMAIN)
        }
    }
}

fn cmd_validate_wordlist(file: &PathBuf, min_per_length: usize) -> ExitCode {
    let bytes = match std::fs::read(file) {
        Ok(bytes) => bytes,
        Err(e) => return usage_error(&format!("cannot read {}: {e}", file.display())),
    };
    let list = match wordlists::load_word_list(&bytes) {
        Ok(list) => list,
        Err(e) => return domain_error(&e.to_string()),
    };
    let mins: BTreeMap<usize, usize> = list
        .words_by_length
        .keys()
        .map(|&length| (length, min_per_length))
        .collect();
    let violations = wordlists::validate_word_list(&list, &mins);
    if violations.is_empty() {
        println!(
            "ok: {} ({} words across {} lengths)",
            file.display(),
            list.words_by_length.values().map(Vec::len).sum::<usize>(),
            list.words_by_length.len(),
        );
        ExitCode::SUCCESS
    } else {
        for violation in &violations {
            println!("{violation}");
        }
        ExitCode::from(EXIT_DOMAIN)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            trials,
            out,
            format,
            threads,
        } => cmd_run(&config, seed, trials, out, format, threads),
        Command::Parse { schema, file } => cmd_parse(&schema, &file),
        Command::ValidateWordlist {
            file,
            min_per_length,
        } => cmd_validate_wordlist(&file, min_per_length),
    }
}
