use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, Metrics};
use crate::data::{Dataset, Label, Provenance, TaskId};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Baseline,
    Masking,
    Separate,
    Classical,
}

impl RowKind {
    pub fn name(self) -> &'static str {
        match self {
            RowKind::Baseline => "baseline",
            RowKind::Masking => "masking",
            RowKind::Separate => "separate",
            RowKind::Classical => "classical",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundResult {
    /// 1-based
    pub round: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub metrics: Metrics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_loss: Option<f64>,
    /// Selected classical model, when applicable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl MeanMetrics {
    pub fn of(rounds: &[RoundResult]) -> Self {
        let n = rounds.len().max(1) as f64;
        let mean = |f: fn(&Metrics) -> f64| rounds.iter().map(|r| f(&r.metrics)).sum::<f64>() / n;
        Self {
            accuracy: mean(|m| m.accuracy),
            precision: mean(|m| m.precision),
            recall: mean(|m| m.recall),
            f1: mean(|m| m.f1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub kind: RowKind,
    /// Masked or exclusively used tasks; empty for the all-task row.
    pub tasks: Vec<TaskId>,
    pub label: String,
    pub rounds: Vec<RoundResult>,
    pub mean: MeanMetrics,
}

impl ReportRow {
    pub fn new(kind: RowKind, tasks: Vec<TaskId>, rounds: Vec<RoundResult>) -> Self {
        let label = row_label(&tasks);
        let mean = MeanMetrics::of(&rounds);
        Self {
            kind,
            tasks,
            label,
            rounds,
            mean,
        }
    }

    /// `all` or task names joined by `+`.
    pub fn task_key(&self) -> String {
        if self.tasks.is_empty() {
            "all".to_string()
        } else {
            self.tasks.iter().map(|t| t.name()).collect::<Vec<_>>().join("+")
        }
    }
}

fn row_label(tasks: &[TaskId]) -> String {
    match tasks {
        [] => "Baseline (all tasks)".to_string(),
        [t] => format!("{}. {}", t.code(), t.title()),
        many => many.iter().map(|t| t.code()).collect::<Vec<_>>().join("+"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub sessions: usize,
    pub sleepy: usize,
    pub non_sleepy: usize,
    pub provenance: Provenance,
}

impl DatasetSummary {
    pub fn of(dataset: &Dataset) -> Self {
        let sleepy = dataset.labels().iter().filter(|&&l| l == Label::Sleepy).count();
        Self {
            sessions: dataset.len(),
            sleepy,
            non_sleepy: dataset.len() - sleepy,
            provenance: dataset.provenance(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub dataset: DatasetSummary,
    pub rows: Vec<ReportRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Table,
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" | "text" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(crate::Error::InvalidConfig(format!("unknown format {other:?}"))),
        }
    }
}

/// Accuracy as a percentage with two decimals, F1 with three and no leading
/// zero: `81.29 (.895)`.
pub fn format_cell(mean: &MeanMetrics) -> String {
    let f1 = format!("{:.3}", mean.f1);
    let f1 = f1.strip_prefix('0').unwrap_or(&f1);
    format!("{:.2} ({f1})", mean.accuracy * 100.0)
}

fn render_table(report: &ExperimentReport) -> String {
    let width = report
        .rows
        .iter()
        .map(|r| r.label.chars().count())
        .max()
        .unwrap_or(0)
        .max("Task".len());
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$} | {:<9} | Accuracy % (F1)", "Task", "Technique");
    let _ = writeln!(out, "{}-+-{}-+-{}", "-".repeat(width), "-".repeat(9), "-".repeat(15));
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{:<width$} | {:<9} | {}",
            row.label,
            row.kind.name(),
            format_cell(&row.mean)
        );
    }
    out
}

fn render_csv(report: &ExperimentReport) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["technique", "task", "round", "accuracy", "precision", "recall", "f1"])?;
    for row in &report.rows {
        let task = row.task_key();
        for r in &row.rounds {
            let m = &r.metrics;
            writer.write_record([
                row.kind.name().to_string(),
                task.clone(),
                r.round.to_string(),
                m.accuracy.to_string(),
                m.precision.to_string(),
                m.recall.to_string(),
                m.f1.to_string(),
            ])?;
        }
        let m = &row.mean;
        writer.write_record([
            row.kind.name().to_string(),
            task,
            "mean".to_string(),
            m.accuracy.to_string(),
            m.precision.to_string(),
            m.recall.to_string(),
            m.f1.to_string(),
        ])?;
    }
    let bytes = writer.into_inner().map_err(|e| crate::Error::Features(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render_report(report: &ExperimentReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Table => Ok(render_table(report)),
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
    }
}
