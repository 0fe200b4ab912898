use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::RunModel;
use crate::error::{Error, Result};
use crate::eval::Metric;
use crate::search::TieBreakPolicy;

/// Typical slowdown of repeatable ranking reported for web collections.
/// Printed for reference only; never asserted.
pub const REFERENCE_OVERHEAD_PERCENT: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariabilityRow {
    pub model: RunModel,
    pub metric: Metric,
    /// Value under the repeatable policy (identical on every index).
    pub repeatable_value: f64,
    /// Extremes over the non-repeatable runs.
    pub min: f64,
    pub max: f64,
    /// Largest absolute difference across all runs, the repeatable one included.
    pub delta: f64,
    /// Non-repeatable value per index, in seed order.
    pub values: Vec<f64>,
}

impl VariabilityRow {
    pub fn new(model: RunModel, metric: Metric, repeatable_value: f64, values: Vec<f64>) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let delta = max.max(repeatable_value) - min.min(repeatable_value);
        VariabilityRow {
            model,
            metric,
            repeatable_value,
            min,
            max,
            delta,
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariabilityReport {
    pub seeds: Vec<u64>,
    pub nonrepeatable_policy: TieBreakPolicy,
    pub repeatable_policy: TieBreakPolicy,
    pub rows: Vec<VariabilityRow>,
}

impl VariabilityReport {
    pub fn row(&self, model: RunModel, metric: Metric) -> Option<&VariabilityRow> {
        self.rows
            .iter()
            .find(|r| r.model == model && r.metric == metric)
    }

    pub fn max_delta(&self) -> f64 {
        self.rows.iter().map(|r| r.delta).fold(0.0, f64::max)
    }

    fn models(&self) -> Vec<RunModel> {
        let mut out: Vec<RunModel> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.model) {
                out.push(r.model);
            }
        }
        out
    }

    fn metrics(&self) -> Vec<Metric> {
        let mut out: Vec<Metric> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.metric) {
                out.push(r.metric);
            }
        }
        out
    }

    /// Full-precision TSV, one row per model and metric.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("model\tmetric\trepeatable\tmin\tmax\tdelta\tvalues\n");
        for r in &self.rows {
            let values: Vec<String> = r.values.iter().map(f64::to_string).collect();
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.model,
                r.metric,
                r.repeatable_value,
                r.min,
                r.max,
                r.delta,
                values.join(",")
            )
            .unwrap();
        }
        out
    }

    /// Human-readable table: one row per model; for each metric the
    /// repeatable value, the non-repeatable min---max, and Δ, at 4 decimals.
    pub fn to_table(&self) -> String {
        let metrics = self.metrics();
        let mut header = vec!["Model".to_string()];
        for m in &metrics {
            header.push(m.label().to_string());
            header.push("min---max".to_string());
            header.push("Δ".to_string());
        }
        let mut lines = vec![header];
        for model in self.models() {
            let mut line = vec![model.label().to_string()];
            for &m in &metrics {
                match self.row(model, m) {
                    Some(r) => {
                        line.push(format!("{:.4}", r.repeatable_value));
                        line.push(format!("{:.4} --- {:.4}", r.min, r.max));
                        line.push(format!("{:.4}", r.delta));
                    }
                    None => line.extend(["-".into(), "-".into(), "-".into()]),
                }
            }
            lines.push(line);
        }
        let mut out = format!(
            "{} indexes (seeds {:?}); non-repeatable: {}; repeatable: {}\n",
            self.seeds.len(),
            self.seeds,
            self.nonrepeatable_policy,
            self.repeatable_policy
        );
        out.push_str(&render_table(&lines));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyRow {
    pub model: RunModel,
    /// Seconds per topic, averaged over measured trials.
    pub mean_latency_nonrepeatable: f64,
    pub mean_latency_repeatable: f64,
    /// `(repeatable / nonrepeatable - 1) * 100`.
    pub delta_percent: f64,
    /// Per-trial mean seconds per topic.
    pub trial_means_nonrepeatable: Vec<f64>,
    pub trial_means_repeatable: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub trials: usize,
    pub warmup_trials: usize,
    pub topics: usize,
    pub nonrepeatable_policy: TieBreakPolicy,
    pub repeatable_policy: TieBreakPolicy,
    pub reference_overhead_percent: f64,
    pub rows: Vec<LatencyRow>,
}

impl LatencyReport {
    pub fn row(&self, model: RunModel) -> Option<&LatencyRow> {
        self.rows.iter().find(|r| r.model == model)
    }

    /// Checks the structural contract of a latency report.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("latency report: {m}")));
        if self.trials == 0 {
            return bad("no measured trials".into());
        }
        if self.rows.is_empty() {
            return bad("no rows".into());
        }
        for r in &self.rows {
            if r.trial_means_nonrepeatable.len() != self.trials
                || r.trial_means_repeatable.len() != self.trials
            {
                return bad(format!("{}: trial count mismatch", r.model));
            }
            let all = r
                .trial_means_nonrepeatable
                .iter()
                .chain(&r.trial_means_repeatable)
                .chain([&r.mean_latency_nonrepeatable, &r.mean_latency_repeatable]);
            for &v in all {
                if !(v.is_finite() && v > 0.0) {
                    return bad(format!("{}: latency {v} is not positive", r.model));
                }
            }
            let expected = (r.mean_latency_repeatable / r.mean_latency_nonrepeatable - 1.0) * 100.0;
            if !r.delta_percent.is_finite()
                || (r.delta_percent - expected).abs() > 1e-9 * expected.abs().max(1.0)
            {
                return bad(format!("{}: inconsistent delta_percent", r.model));
            }
        }
        Ok(())
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("model\tnonrepeatable_s\trepeatable_s\tdelta_percent\ttrials\n");
        for r in &self.rows {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                r.model,
                r.mean_latency_nonrepeatable,
                r.mean_latency_repeatable,
                r.delta_percent,
                self.trials
            )
            .unwrap();
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut lines = vec![vec![
            "Model".to_string(),
            "Non-Repeatable".to_string(),
            "Repeatable".to_string(),
            "Δ".to_string(),
        ]];
        for r in &self.rows {
            lines.push(vec![
                r.model.label().to_string(),
                format_seconds(r.mean_latency_nonrepeatable),
                format_seconds(r.mean_latency_repeatable),
                format!("{:+.1}%", r.delta_percent),
            ]);
        }
        let mut out = format!(
            "mean latency per topic over {} trials ({} warm-up), {} topics, single thread\n",
            self.trials, self.warmup_trials, self.topics
        );
        out.push_str(&render_table(&lines));
        writeln!(
            out,
            "reference: repeatable ranking has been observed to cost about {:.0}% on web collections",
            self.reference_overhead_percent
        )
        .unwrap();
        out
    }
}

fn format_seconds(s: f64) -> String {
    if s >= 0.01 {
        format!("{s:.2}s")
    } else if s >= 1e-3 {
        format!("{:.2}ms", s * 1e3)
    } else if s >= 1e-6 {
        format!("{:.1}µs", s * 1e6)
    } else {
        format!("{:.0}ns", s * 1e9)
    }
}

fn render_table(lines: &[Vec<String>]) -> String {
    let cols = lines.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            lines
                .iter()
                .filter_map(|l| l.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for (i, line) in lines.iter().enumerate() {
        let cells: Vec<String> = line
            .iter()
            .enumerate()
            .map(|(c, s)| {
                let pad = widths[c] - s.chars().count();
                if c == 0 {
                    format!("{s}{}", " ".repeat(pad))
                } else {
                    format!("{}{s}", " ".repeat(pad))
                }
            })
            .collect();
        writeln!(out, "| {} |", cells.join(" | ")).unwrap();
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            writeln!(out, "|-{}-|", rule.join("-|-")).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_includes_repeatable_value() {
        let r = VariabilityRow::new(
            RunModel::Bm25,
            Metric::Ap,
            0.2501,
            vec![0.2498, 0.2500, 0.2499],
        );
        assert_eq!(r.min, 0.2498);
        assert_eq!(r.max, 0.2500);
        assert!((r.delta - 0.0003).abs() < 1e-12);
        let r = VariabilityRow::new(RunModel::Ql, Metric::P30, 0.5, vec![0.5; 5]);
        assert_eq!(r.delta, 0.0);
    }

    #[test]
    fn table_layout() {
        let report = VariabilityReport {
            seeds: vec![1, 2],
            nonrepeatable_policy: TieBreakPolicy::InternalId,
            repeatable_policy: TieBreakPolicy::ExternalId,
            rows: vec![
                VariabilityRow::new(RunModel::Bm25, Metric::Ap, 0.25, vec![0.2498, 0.2501]),
                VariabilityRow::new(RunModel::Bm25, Metric::P30, 0.3123, vec![0.3120, 0.3124]),
            ],
        };
        let table = report.to_table();
        assert!(
            table.contains("| BM25  | 0.2500 | 0.2498 --- 0.2501 | 0.0003 |"),
            "{table}"
        );
        assert!(report
            .to_tsv()
            .starts_with("model\tmetric\trepeatable\tmin\tmax\tdelta\tvalues\nbm25\tap\t0.25\t"));
    }

    #[test]
    fn latency_validation() {
        let row = LatencyRow {
            model: RunModel::Bm25,
            mean_latency_nonrepeatable: 0.18,
            mean_latency_repeatable: 0.23,
            delta_percent: (0.23 / 0.18 - 1.0) * 100.0,
            trial_means_nonrepeatable: vec![0.18],
            trial_means_repeatable: vec![0.23],
        };
        let mut report = LatencyReport {
            trials: 1,
            warmup_trials: 0,
            topics: 3,
            nonrepeatable_policy: TieBreakPolicy::InternalId,
            repeatable_policy: TieBreakPolicy::ExternalId,
            reference_overhead_percent: REFERENCE_OVERHEAD_PERCENT,
            rows: vec![row],
        };
        report.validate().unwrap();
        assert!(
            report
                .to_table()
                .contains("| BM25  |          0.18s |      0.23s | +27.8% |"),
            "{}",
            report.to_table()
        );
        report.rows[0].mean_latency_repeatable = 0.0;
        assert!(report.validate().is_err());
    }
}
