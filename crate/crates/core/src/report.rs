//! Batch and experiment reports, and their JSON/CSV emission.
//!
//! Reports are tallies plus rates derived from tallies; predicted values are
//! kept separate from observed ones. All maps are ordered so serialization
//! is byte-stable.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::parser::ParseStrategy;
use crate::validator::FailureKind;

/// Per-batch statistics collected by the orchestrator.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub requested: u64,
    pub produced: u64,
    pub attempts_total: u64,
    pub parse_strategy_counts: BTreeMap<ParseStrategy, u64>,
    pub violation_counts: BTreeMap<FailureKind, u64>,
    pub fallback_used: u64,
    pub sessions_opened: u64,
    pub simulated_latency_ms: u64,
    /// Outputs that decoded directly with no recovery and no sanitization.
    pub well_formed_outputs: u64,
    /// Model-produced puzzles sharing a hint with an earlier puzzle from the
    /// same session.
    pub duplicate_hint_puzzles: u64,
    /// Estimated per-field success rate, the observed well-formed rate taken
    /// to the `1/field_count` power.
    pub per_field_success_estimate: f64,
}

impl GenerationReport {
    pub fn parse_successes(&self) -> u64 {
        self.parse_strategy_counts.values().sum()
    }

    pub fn violations_total(&self) -> u64 {
        self.violation_counts.values().sum()
    }

    /// Folds another batch report into this one. Rates are recomputed by the
    /// caller once all tallies are merged.
    pub fn absorb(&mut self, other: &GenerationReport) {
        self.requested += other.requested;
        self.produced += other.produced;
        self.attempts_total += other.attempts_total;
        for (k, v) in &other.parse_strategy_counts {
            *self.parse_strategy_counts.entry(*k).or_insert(0) += v;
        }
        for (k, v) in &other.violation_counts {
            *self.violation_counts.entry(*k).or_insert(0) += v;
        }
        self.fallback_used += other.fallback_used;
        self.sessions_opened += other.sessions_opened;
        self.simulated_latency_ms += other.simulated_latency_ms;
        self.well_formed_outputs += other.well_formed_outputs;
        self.duplicate_hint_puzzles += other.duplicate_hint_puzzles;
    }

    pub fn finalize_estimate(&mut self, field_count: usize) {
        self.per_field_success_estimate = if self.attempts_total == 0 || field_count == 0 {
            0.0
        } else {
            let rate = self.well_formed_outputs as f64 / self.attempts_total as f64;
            rate.powf(1.0 / field_count as f64)
        };
    }
}

/// One row per trial for the CSV emission and for parallel-vs-serial
/// equality checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub trial_index: u64,
    pub seed: u64,
    pub requested: u64,
    pub produced: u64,
    pub attempts_total: u64,
    pub parse_successes: u64,
    pub violations_total: u64,
    pub fallback_used: u64,
    pub sessions_opened: u64,
    pub well_formed_outputs: u64,
    pub duplicate_hint_puzzles: u64,
    pub simulated_latency_ms: u64,
}

/// Aggregated result of a seeded multi-trial experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// The resolved configuration the experiment actually ran with.
    pub config: crate::config::ExperimentConfig,
    pub aggregate: GenerationReport,
    pub trials: Vec<TrialStats>,
    // Derived rates, all in [0, 1] except mean_attempts_per_item.
    pub parse_success_rate: f64,
    pub end_to_end_success_rate: f64,
    pub word_length_violation_rate: f64,
    pub duplicate_hint_rate: f64,
    pub fallback_rate: f64,
    pub mean_attempts_per_item: f64,
    /// Analytic `(1-p)^n` for the configured fault profile and schema.
    pub predicted_field_success: f64,
    /// Tally-derived well-formed output rate.
    pub observed_field_success: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ExperimentReport {
    pub fn from_trials(
        config: crate::config::ExperimentConfig,
        trials: Vec<TrialStats>,
        mut aggregate: GenerationReport,
        predicted_field_success: f64,
    ) -> Self {
        aggregate.finalize_estimate(config.schema.field_count());
        let parse_success_rate = ratio(aggregate.parse_successes(), aggregate.attempts_total);
        let end_to_end_success_rate = ratio(aggregate.produced, aggregate.requested);
        let word_length_violation_rate = ratio(
            aggregate
                .violation_counts
                .get(&FailureKind::WordLength)
                .copied()
                .unwrap_or(0),
            aggregate.attempts_total,
        );
        let duplicate_hint_rate = ratio(aggregate.duplicate_hint_puzzles, aggregate.produced);
        let fallback_rate = ratio(aggregate.fallback_used, aggregate.produced);
        let mean_attempts_per_item = ratio(aggregate.attempts_total, aggregate.requested);
        let observed_field_success = ratio(aggregate.well_formed_outputs, aggregate.attempts_total);
        ExperimentReport {
            config,
            aggregate,
            trials,
            parse_success_rate,
            end_to_end_success_rate,
            word_length_violation_rate,
            duplicate_hint_rate,
            fallback_rate,
            mean_attempts_per_item,
            predicted_field_success,
            observed_field_success,
        }
    }

    /// Stable-key-order JSON document, terminated by a newline.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        out.push('\n');
        out
    }

    /// One row per trial plus a `summary` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(
            "row,trial_index,seed,requested,produced,attempts_total,parse_successes,\
             violations_total,fallback_used,sessions_opened,well_formed_outputs,\
             duplicate_hint_puzzles,simulated_latency_ms,parse_success_rate,\
             end_to_end_success_rate,word_length_violation_rate,duplicate_hint_rate,\
             fallback_rate,mean_attempts_per_item,predicted_field_success,observed_field_success\n",
        );
        for t in &self.trials {
            writeln!(
                out,
                "trial,{},{},{},{},{},{},{},{},{},{},{},{},,,,,,,,",
                t.trial_index,
                t.seed,
                t.requested,
                t.produced,
                t.attempts_total,
                t.parse_successes,
                t.violations_total,
                t.fallback_used,
                t.sessions_opened,
                t.well_formed_outputs,
                t.duplicate_hint_puzzles,
                t.simulated_latency_ms,
            )
            .expect("writing to string cannot fail");
        }
        let a = &self.aggregate;
        writeln!(
            out,
            "summary,,{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.config.seed,
            a.requested,
            a.produced,
            a.attempts_total,
            a.parse_successes(),
            a.violations_total(),
            a.fallback_used,
            a.sessions_opened,
            a.well_formed_outputs,
            a.duplicate_hint_puzzles,
            a.simulated_latency_ms,
            self.parse_success_rate,
            self.end_to_end_success_rate,
            self.word_length_violation_rate,
            self.duplicate_hint_rate,
            self.fallback_rate,
            self.mean_attempts_per_item,
            self.predicted_field_success,
            self.observed_field_success,
        )
        .expect("writing to string cannot fail");
        out
    }
}

/// Output format for report emission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!(
                "unknown report format \"{other}\" (expected json or csv)"
            )),
        }
    }
}

/// Renders the report in the requested format.
pub fn render_report(report: &ExperimentReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Csv => report.to_csv(),
    }
}

/// Writes the rendered report to a file, creating parent directories.
pub fn emit_report(
    report: &ExperimentReport,
    format: ReportFormat,
    path: &std::path::Path,
) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, render_report(report, format))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absorb_sums_tallies() {
        let mut a = GenerationReport {
            requested: 5,
            produced: 4,
            attempts_total: 7,
            ..GenerationReport::default()
        };
        a.parse_strategy_counts
            .insert(ParseStrategy::DirectDecode, 3);
        let mut b = GenerationReport {
            requested: 5,
            produced: 5,
            attempts_total: 6,
            ..GenerationReport::default()
        };
        b.parse_strategy_counts
            .insert(ParseStrategy::DirectDecode, 2);
        b.parse_strategy_counts.insert(ParseStrategy::Structural, 1);
        a.absorb(&b);
        assert_eq!(a.requested, 10);
        assert_eq!(a.attempts_total, 13);
        assert_eq!(a.parse_strategy_counts[&ParseStrategy::DirectDecode], 5);
        assert_eq!(a.parse_strategy_counts[&ParseStrategy::Structural], 1);
    }

    #[test]
    fn per_field_estimate_is_nth_root_of_observed() {
        let mut r = GenerationReport {
            attempts_total: 100,
            well_formed_outputs: 32,
            ..GenerationReport::default()
        };
        r.finalize_estimate(7);
        let expected = (0.32f64).powf(1.0 / 7.0);
        assert!((r.per_field_success_estimate - expected).abs() < 1e-12);
        r.attempts_total = 0;
        r.finalize_estimate(7);
        assert_eq!(r.per_field_success_estimate, 0.0);
    }
}
