use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{ensure_dir, AstRun, ClassifierRun, ExperimentConfig, ExperimentError, CONVERGENCE_FILE};
use crate::classifier::Metrics;
use crate::env::Event;
use crate::qlearn::{ConvergenceSeries, FraudPath};

pub const REPORT_FORMAT: &str = "fraud-ast-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSummary {
    pub train_rows: usize,
    pub train_fraud: usize,
    pub rebalanced_rows: usize,
    pub rebalanced_fraud: usize,
    pub test_rows: usize,
    pub test_fraud: usize,
}

/// Everything needed to inspect and reproduce a run. Wall-clock timing is
/// kept separately so that reports of equal runs are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub data: DataSummary,
    pub metrics: Metrics,
    pub final_training_loss: f64,
    pub paths: Vec<FraudPath>,
    pub q_states: usize,
    pub convergence_file: String,
    pub convergence: ConvergenceSeries,
}

impl RunReport {
    pub fn new(cfg: &ExperimentConfig, cls: &ClassifierRun, ast: &AstRun) -> Self {
        RunReport {
            format: REPORT_FORMAT.into(),
            seed: cfg.seed,
            config: cfg.clone(),
            data: cls.data,
            metrics: cls.metrics,
            final_training_loss: cls.final_loss,
            paths: ast.paths.clone(),
            q_states: ast.q.len(),
            convergence_file: CONVERGENCE_FILE.into(),
            convergence: ast.convergence.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Seconds per pipeline stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing(pub BTreeMap<String, f64>);

impl Timing {
    pub fn record(&mut self, stage: &str, since: Instant) {
        self.0.insert(stage.to_string(), since.elapsed().as_secs_f64());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("timing serializes") + "\n"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Human,
    Machine,
}

impl OutputFormat {
    pub fn file_name(self) -> &'static str {
        match self {
            OutputFormat::Human => "report.txt",
            OutputFormat::Machine => "report.json",
        }
    }
}

pub fn render_machine(report: &RunReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes") + "\n"
}

fn event_name(e: Event) -> &'static str {
    match e {
        Event::InE => "InE",
        Event::Caught => "Caught",
        Event::Continue => "Continue",
    }
}

fn fmt_amount(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("${v:.0}")
    } else {
        format!("${v:.2}")
    }
}

fn fmt_interval(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0} min")
    } else {
        format!("{v:.1} min")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

/// Path table with one column group per card, followed by the terminal row.
pub fn render_paths(paths: &[FraudPath]) -> String {
    const CELL: usize = 42;
    let mut out = String::new();
    let rows = paths.iter().map(|p| p.steps.len()).max().unwrap_or(0);
    let _ = write!(out, "{:<6}", "step");
    for p in paths {
        let _ = write!(out, "| {:<CELL$}", format!("card with {} prior transactions", p.card_age));
    }
    out.push('\n');
    let _ = write!(out, "{:<6}", "");
    for _ in paths {
        let _ = write!(out, "| {:<20}{:>8}{:>9}  {:<3}", "category", "amount", "interval", "");
    }
    out.push('\n');
    for i in 0..rows {
        let _ = write!(out, "{:<6}", i + 1);
        for p in paths {
            let cell = match p.steps.get(i) {
                Some(s) => format!(
                    "{:<20}{:>8}{:>9}  {:<3}",
                    s.category.name(),
                    fmt_amount(s.amount),
                    fmt_interval(s.interval),
                    if s.outcome.is_suspension() { "x" } else { "" }
                ),
                None => String::new(),
            };
            let _ = write!(out, "| {cell:<CELL$}");
        }
        out.push('\n');
    }
    let _ = write!(out, "{:<6}", "end");
    for p in paths {
        let cell = format!(
            "{}  value {}  reward {:.4}",
            event_name(p.event),
            fmt_amount(p.fraud_value),
            p.total_reward
        );
        let _ = write!(out, "| {cell:<CELL$}");
    }
    out.push('\n');
    out.lines().map(str::trim_end).collect::<Vec<_>>().join("\n") + "\n"
}

pub fn render_human(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seed {}", report.seed);
    write_data(&mut out, &report.data);
    write_metrics(&mut out, &report.metrics);
    write_paths(&mut out, report.config.rules.repetition_rule_enabled, &report.paths);
    write_convergence(&mut out, report.q_states, &report.convergence);
    out
}

/// Classifier stage on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub format: String,
    pub seed: u64,
    pub data: DataSummary,
    pub metrics: Metrics,
    pub final_training_loss: f64,
}

impl ClassifierReport {
    pub fn new(cfg: &ExperimentConfig, cls: &ClassifierRun) -> Self {
        ClassifierReport {
            format: REPORT_FORMAT.into(),
            seed: cfg.seed,
            data: cls.data,
            metrics: cls.metrics,
            final_training_loss: cls.final_loss,
        }
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Machine => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
            OutputFormat::Human => {
                let mut out = String::new();
                write_data(&mut out, &self.data);
                write_metrics(&mut out, &self.metrics);
                let _ = writeln!(out, "  final training loss         {:.6}", self.final_training_loss);
                out
            }
        }
    }
}

/// Greedy paths extracted from a Q-table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub format: String,
    pub seed: u64,
    pub repetition_rule_enabled: bool,
    pub q_states: usize,
    pub paths: Vec<FraudPath>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSeries>,
}

impl PathReport {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Machine => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
            OutputFormat::Human => {
                let mut out = String::new();
                write_paths(&mut out, self.repetition_rule_enabled, &self.paths);
                if let Some(c) = &self.convergence {
                    write_convergence(&mut out, self.q_states, c);
                }
                out
            }
        }
    }
}

fn write_data(out: &mut String, d: &DataSummary) {
    let _ = writeln!(
        out,
        "training rows {} ({} fraud), rebalanced to {} ({} fraud); test rows {} ({} fraud)",
        d.train_rows, d.train_fraud, d.rebalanced_rows, d.rebalanced_fraud, d.test_rows, d.test_fraud
    );
}

fn write_metrics(out: &mut String, m: &Metrics) {
    let _ = writeln!(out, "\nclassifier on held-out data");
    let _ = writeln!(out, "  accuracy                    {:.4}", m.accuracy);
    let _ = writeln!(out, "  decline rate                {:.4}", m.decline_rate);
    let _ = writeln!(out, "  uncaught fraud rate         {:.4}", m.uncaught_fraud_rate);
    let _ = writeln!(out, "  uncaught fraction of fraud  {}", fmt_opt(m.uncaught_fraction_of_fraud));
}

fn write_paths(out: &mut String, repetition: bool, paths: &[FraudPath]) {
    let _ = writeln!(
        out,
        "\nmost likely fraud path (repetition rule {})",
        if repetition { "on" } else { "off" }
    );
    out.push_str(&render_paths(paths));
}

fn write_convergence(out: &mut String, q_states: usize, c: &ConvergenceSeries) {
    let _ = writeln!(
        out,
        "\nq-table states {}; convergence checkpoints {} (every {} episodes), peak {:.4}, last-decile mean {}",
        q_states,
        c.points.len(),
        c.stride,
        c.peak(),
        fmt_opt(c.tail_mean(0.1))
    );
}

/// Writes the report into `dir` and returns the file path.
pub fn emit_report(report: &RunReport, format: OutputFormat, dir: &Path) -> Result<PathBuf, ExperimentError> {
    ensure_dir(dir)?;
    let path = dir.join(format.file_name());
    let text = match format {
        OutputFormat::Human => render_human(report),
        OutputFormat::Machine => render_machine(report),
    };
    std::fs::write(&path, text).map_err(|e| ExperimentError::io(&path, e))?;
    Ok(path)
}
