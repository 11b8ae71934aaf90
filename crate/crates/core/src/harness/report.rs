use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::OutputFormat;
use crate::classifiers::ClassifierKind;
use crate::corpus::EmotionLabel;
use crate::error::Result;
use crate::features::Scheme;
use crate::metrics::{ConfusionMatrix, EvaluationReport};

/// Outcome of one (classifier, seed) pair. With cross-validation the
/// confusion matrix is summed over folds and the scores are fold means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub test_size: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub confusion: ConfusionMatrix,
    pub cpu_time_train_ms: f64,
    pub cpu_time_predict_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierResult {
    pub kind: ClassifierKind,
    pub name: String,
    pub scheme: Scheme,
    /// Mean over all runs.
    pub summary: EvaluationReport,
    /// Sample standard deviation over runs; zero for a single run.
    pub accuracy_stdev: f64,
    pub macro_f1_stdev: f64,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub path: String,
    pub reviews: usize,
    pub label_counts: Vec<(EmotionLabel, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub test_fraction: f64,
    pub seeds: Vec<u64>,
    pub scheme: Scheme,
    pub fit_on_all: bool,
    pub stratified: bool,
    pub folds: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub dataset: DatasetSummary,
    pub settings: RunSettings,
    /// One entry per configured classifier, in fixed kind order.
    pub per_classifier: Vec<ClassifierResult>,
    /// Best first.
    pub ranking: Vec<ClassifierKind>,
    pub recommendation: Vec<ClassifierKind>,
    pub environment: String,
}

impl BenchmarkReport {
    pub fn get(&self, kind: ClassifierKind) -> Option<&ClassifierResult> {
        self.per_classifier.iter().find(|r| r.kind == kind)
    }

    /// Copy with every timing field set to zero, for reproducibility checks.
    pub fn without_timing(&self) -> BenchmarkReport {
        let mut r = self.clone();
        for c in &mut r.per_classifier {
            c.summary.cpu_time_train_ms = 0.0;
            c.summary.cpu_time_predict_ms = 0.0;
            for run in &mut c.runs {
                run.cpu_time_train_ms = 0.0;
                run.cpu_time_predict_ms = 0.0;
            }
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking {
    pub order: Vec<ClassifierKind>,
    pub recommended: Vec<ClassifierKind>,
}

/// Orders by accuracy descending, then macro-F1 descending, then kind order.
/// Every classifier that ties the leader on both scores is recommended.
pub fn rank_and_recommend(reports: &[EvaluationReport]) -> Ranking {
    let mut sorted: Vec<&EvaluationReport> = reports.iter().collect();
    sorted.sort_by(|a, b| {
        b.accuracy
            .partial_cmp(&a.accuracy)
            .unwrap_or(Ordering::Equal)
            .then(b.macro_f1.partial_cmp(&a.macro_f1).unwrap_or(Ordering::Equal))
            .then(a.classifier.cmp(&b.classifier))
    });
    let recommended = match sorted.first() {
        Some(head) => sorted
            .iter()
            .take_while(|r| r.accuracy == head.accuracy && r.macro_f1 == head.macro_f1)
            .map(|r| r.classifier)
            .collect(),
        None => Vec::new(),
    };
    Ranking {
        order: sorted.iter().map(|r| r.classifier).collect(),
        recommended,
    }
}

pub fn render_report(report: &BenchmarkReport, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        OutputFormat::Markdown => Ok(render_markdown(report)),
    }
}

pub fn parse_report(json: &str) -> Result<BenchmarkReport> {
    Ok(serde_json::from_str(json)?)
}

fn names(report: &BenchmarkReport, kinds: &[ClassifierKind]) -> String {
    kinds
        .iter()
        .map(|k| report.get(*k).map_or_else(|| k.to_string(), |r| r.name.clone()))
        .collect::<Vec<_>>()
        .join(", ")
}

fn render_markdown(report: &BenchmarkReport) -> String {
    let mut out = String::new();
    let s = &report.settings;
    let seeds: Vec<String> = s.seeds.iter().map(u64::to_string).collect();
    let split = match s.folds {
        Some(k) => format!("{k}-fold cross-validation"),
        None => format!("hold-out test fraction {}", s.test_fraction),
    };
    let _ = writeln!(out, "# Emotion classification benchmark\n");
    let _ = writeln!(out, "- Dataset: {} ({} reviews)", report.dataset.path, report.dataset.reviews);
    let counts: Vec<String> = report
        .dataset
        .label_counts
        .iter()
        .map(|(l, n)| format!("{} {n}", l.title()))
        .collect();
    let _ = writeln!(out, "- Labels: {}", counts.join(", "));
    let _ = writeln!(
        out,
        "- Features: {}{}; {split}; seeds {}",
        s.scheme,
        if s.fit_on_all { " fitted on all data" } else { " fitted on training split" },
        seeds.join(", ")
    );
    let _ = writeln!(out, "- Environment: {}\n", report.environment);

    for c in &report.per_classifier {
        let r = &c.summary;
        let _ = writeln!(out, "## {}\n", c.name);
        let _ = writeln!(out, "| Emotion | Precision | Recall | F1-Score |");
        let _ = writeln!(out, "|---|---|---|---|");
        for (label, m) in &r.per_label {
            let _ = writeln!(out, "| {} | {:.2} | {:.2} | {:.2} |", label.title(), m.precision, m.recall, m.f1);
        }
        let spread = if c.runs.len() > 1 {
            format!(" ± {:.2}", 100.0 * c.accuracy_stdev)
        } else {
            String::new()
        };
        let _ = writeln!(out, "| Accuracy | {:.2}%{spread} | | |", 100.0 * r.accuracy);
        let _ = writeln!(
            out,
            "| CPU Time (ms) | train {:.2} | predict {:.2} | |\n",
            r.cpu_time_train_ms, r.cpu_time_predict_ms
        );
    }

    let _ = writeln!(out, "## Overall results\n");
    let _ = writeln!(out, "| Classifier | Precision (Avg) | Recall (Avg) | F1-Score (Avg) | Accuracy |");
    let _ = writeln!(out, "|---|---|---|---|---|");
    for c in &report.per_classifier {
        let r = &c.summary;
        let _ = writeln!(
            out,
            "| {} | {:.2} | {:.2} | {:.2} | {:.2} |",
            c.name,
            r.macro_precision,
            r.macro_recall,
            r.macro_f1,
            100.0 * r.accuracy
        );
    }
    let _ = writeln!(out, "\nRanking: {}", names(report, &report.ranking));
    let _ = writeln!(out, "Recommended: {}", names(report, &report.recommendation));
    out
}
