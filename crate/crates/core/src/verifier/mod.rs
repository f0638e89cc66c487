//! Inference: claim verification, question answering, answer matching and
//! accuracy reports.

mod matching;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use matching::{denotation_items, gold_items, match_answer};

use crate::correction::{
    run_syntax_loop, CandidateQuery, CorrectionPolicy, FailureReason, Task, TraceStep,
};
use crate::expr::{coerce_truth, execute_answer, EvalErrorKind, Value};
use crate::forge::{par_map, DatasetEntry, Label, Mode, TableCatalog};
use crate::gateway::{Gateway, PromptKind, Slot, Slots};
use crate::table::{render_for_prompt, RenderLimits, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Entailed,
    Refuted,
    Failed,
}

impl Outcome {
    pub fn label(self) -> Option<Label> {
        match self {
            Outcome::Entailed => Some(Label::Entailed),
            Outcome::Refuted => Some(Label::Refuted),
            Outcome::Failed => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub query: String,
    pub trace: Vec<TraceStep>,
    /// Set exactly when the outcome is `Failed`.
    pub failure: Option<FailureReason>,
    /// Kinds of every execution error met on the way, first query included.
    pub error_kinds: Vec<EvalErrorKind>,
    pub latency: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    /// `None` when no executable query was obtained.
    pub value: Option<Value>,
    pub query: String,
    pub trace: Vec<TraceStep>,
    pub failure: Option<FailureReason>,
    pub error_kinds: Vec<EvalErrorKind>,
    pub latency: Duration,
}

/// Query obtained for a task, after the syntax loop.
struct Resolved {
    query: String,
    trace: Vec<TraceStep>,
    failure: Option<FailureReason>,
    error_kinds: Vec<EvalErrorKind>,
}

fn resolve(
    task: Task<'_>,
    kind: PromptKind,
    slots: Slots,
    table: &Table,
    gateway: &Gateway,
    policy: &CorrectionPolicy,
) -> Resolved {
    let query = match gateway.generate(kind, &slots) {
        Ok(q) => q,
        Err(e) => {
            let failure = Some(FailureReason::Gateway(e.to_string()));
            return Resolved {
                query: String::new(),
                trace: Vec::new(),
                failure,
                error_kinds: Vec::new(),
            };
        }
    };
    let first = task.check(&query, table).err().map(|e| e.kind);
    let (query, trace, failure) = match run_syntax_loop(
        CandidateQuery::generated(query),
        task,
        table,
        gateway,
        policy,
    ) {
        Ok(c) if c.last_error.is_none() => (c.source, c.trace, None),
        // syntax correction is off, so the budget was zero
        Ok(c) => (c.source, c.trace, Some(FailureReason::BudgetExhausted)),
        Err(f) => (f.candidate.source, f.candidate.trace, Some(f.reason)),
    };
    let later = trace
        .iter()
        .filter_map(|s| s.error.as_deref().and_then(EvalErrorKind::from_rendered));
    let error_kinds = first.into_iter().chain(later).collect();
    Resolved {
        query,
        trace,
        failure,
        error_kinds,
    }
}

fn base_slots(table: &Table) -> Slots {
    let mut slots = Slots::new();
    slots.insert(
        Slot::Table,
        render_for_prompt(table, RenderLimits::default()),
    );
    slots
}

/// Generates a query for the statement, repairs it if needed, and runs it.
pub fn verify_claim(
    statement: &str,
    table: &Table,
    gateway: &Gateway,
    policy: &CorrectionPolicy,
) -> Verdict {
    let started = Instant::now();
    if statement.trim().is_empty() {
        return Verdict {
            outcome: Outcome::Failed,
            query: String::new(),
            trace: Vec::new(),
            failure: Some(FailureReason::Gateway("empty statement".into())),
            error_kinds: Vec::new(),
            latency: started.elapsed(),
        };
    }
    let mut slots = base_slots(table);
    slots.insert(Slot::Statement, statement.to_string());
    let task = Task::Fact { statement };
    let r = resolve(
        task,
        PromptKind::FactGenerate,
        slots,
        table,
        gateway,
        policy,
    );
    let outcome = match r.failure {
        Some(_) => Outcome::Failed,
        None => {
            let value = execute_answer(&r.query, table).and_then(|v| coerce_truth(&v));
            match value {
                Ok(true) => Outcome::Entailed,
                Ok(false) => Outcome::Refuted,
                Err(_) => Outcome::Failed,
            }
        }
    };
    let latency = started.elapsed();
    Verdict {
        outcome,
        query: r.query,
        trace: r.trace,
        failure: r.failure,
        error_kinds: r.error_kinds,
        latency,
    }
}

/// A one-element vector or one-cell table stands for its element.
pub fn flatten_denotation(value: Value) -> Value {
    match value {
        Value::Vector(s) if s.values.len() == 1 => {
            Value::Scalar(s.values.into_iter().next().expect("one value"))
        }
        Value::SubTable(t) if t.row_count() == 1 && t.col_count() == 1 => {
            Value::Scalar(t.cell(0, 0).clone())
        }
        other => other,
    }
}

/// Generates a query for the question, repairs it if needed, and returns
/// its denotation.
pub fn answer_question(
    question: &str,
    table: &Table,
    gateway: &Gateway,
    policy: &CorrectionPolicy,
) -> Answer {
    let started = Instant::now();
    let mut slots = base_slots(table);
    slots.insert(Slot::Question, question.to_string());
    let task = Task::Qa { question };
    let r = resolve(task, PromptKind::QaInfer, slots, table, gateway, policy);
    let value = match r.failure {
        Some(_) => None,
        None => execute_answer(&r.query, table).ok().map(flatten_denotation),
    };
    let latency = started.elapsed();
    Answer {
        value,
        query: r.query,
        trace: r.trace,
        failure: r.failure,
        error_kinds: r.error_kinds,
        latency,
    }
}

/// Scored result for one dataset entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryResult {
    pub id: String,
    pub query: String,
    pub trace: Vec<TraceStep>,
    /// `entailed`, `refuted`, `answered` or `failed`.
    pub outcome: String,
    pub predicted: Option<String>,
    pub gold: String,
    pub y: u8,
    #[serde(default)]
    pub error_kinds: Vec<EvalErrorKind>,
}

/// How entries without a verdict or answer enter the accuracy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureScoring {
    /// Counted, with y = 0.
    #[default]
    Incorrect,
    /// Left out of every accuracy denominator; still counted in `n` and
    /// `failure_rate`.
    Excluded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScore {
    pub n: usize,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ablation {
    pub no_corr: Option<f64>,
    pub with_corr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub mode: Mode,
    /// Mean of the per-entry indicators; `None` for an empty dataset.
    pub accuracy: Option<f64>,
    pub n: usize,
    pub per_label: BTreeMap<String, LabelScore>,
    pub failure_rate: Option<f64>,
    #[serde(default)]
    pub failure_scoring: FailureScoring,
    /// Execution errors by kind, summed over every attempt of every entry.
    #[serde(default)]
    pub error_kinds: BTreeMap<String, usize>,
    pub ablation: Option<Ablation>,
}

fn mean(hits: usize, n: usize) -> Option<f64> {
    (n > 0).then(|| hits as f64 / n as f64)
}

impl Report {
    /// Aggregates per-entry results, failures scored as incorrect.
    /// Fact-mode entries are grouped by gold label.
    pub fn from_results(mode: Mode, results: &[EntryResult]) -> Report {
        Report::scored(mode, results, FailureScoring::Incorrect)
    }

    pub fn scored(mode: Mode, results: &[EntryResult], scoring: FailureScoring) -> Report {
        let n = results.len();
        let failed = |r: &EntryResult| r.outcome == "failed";
        let failures = results.iter().filter(|r| failed(r)).count();
        let counted: Vec<&EntryResult> = match scoring {
            FailureScoring::Incorrect => results.iter().collect(),
            FailureScoring::Excluded => results.iter().filter(|r| !failed(r)).collect(),
        };
        let hits = counted.iter().filter(|r| r.y == 1).count();
        let mut per_label = BTreeMap::new();
        if mode == Mode::Fact {
            let mut groups: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
            for r in &counted {
                let g = groups.entry(r.gold.as_str()).or_default();
                g.0 += 1;
                g.1 += usize::from(r.y);
            }
            for (label, (count, hit)) in groups {
                per_label.insert(
                    label.to_string(),
                    LabelScore {
                        n: count,
                        accuracy: mean(hit, count),
                    },
                );
            }
        }
        let mut error_kinds = BTreeMap::new();
        for kind in results.iter().flat_map(|r| &r.error_kinds) {
            *error_kinds.entry(kind.name().to_string()).or_insert(0) += 1;
        }
        Report {
            mode,
            accuracy: mean(hits, counted.len()),
            n,
            per_label,
            failure_rate: mean(failures, n),
            failure_scoring: scoring,
            error_kinds,
            ablation: None,
        }
    }

    /// Plain-text table: one metric per row, percentages to two decimals.
    pub fn to_table(&self) -> String {
        let pct =
            |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{:.2}", v * 100.0));
        let mut out = String::new();
        match &self.ablation {
            Some(a) => {
                let _ = writeln!(out, "{:<14}{:>10}{:>12}", "", "No Corr.", "With Corr.");
                let _ = writeln!(
                    out,
                    "{:<14}{:>10}{:>12}",
                    "accuracy",
                    pct(a.no_corr),
                    pct(a.with_corr)
                );
            }
            None => {
                let _ = writeln!(out, "{:<14}{:>10}", "accuracy", pct(self.accuracy));
            }
        }
        for (label, score) in &self.per_label {
            let title = format!("all {label}");
            let _ = writeln!(
                out,
                "{:<14}{:>10}  (n={})",
                title,
                pct(score.accuracy),
                score.n
            );
        }
        let _ = writeln!(out, "{:<14}{:>10}", "failure rate", pct(self.failure_rate));
        let _ = writeln!(out, "{:<14}{:>10}", "n", self.n);
        if self.failure_scoring == FailureScoring::Excluded {
            let _ = writeln!(out, "failures excluded from accuracy");
        }
        for (kind, count) in &self.error_kinds {
            let _ = writeln!(out, "{:<18}{:>6}", kind, count);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub report: Report,
    pub results: Vec<EntryResult>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("entry '{id}' is a {found} entry but the evaluation mode is {expected}")]
    ModeMismatch {
        id: String,
        expected: Mode,
        found: Mode,
    },
}

fn failed_result(e: &DatasetEntry, gold: String, detail: &str) -> EntryResult {
    EntryResult {
        id: e.id.clone(),
        query: String::new(),
        trace: Vec::new(),
        outcome: "failed".into(),
        predicted: Some(detail.into()),
        gold,
        y: 0,
        error_kinds: Vec::new(),
    }
}

fn score_entry(
    e: &DatasetEntry,
    catalog: &TableCatalog,
    gateway: &Gateway,
    policy: &CorrectionPolicy,
) -> EntryResult {
    match e.mode {
        Mode::Fact => {
            let gold = e.label.map_or("", Label::name).to_string();
            let Some(table) = catalog.get(&e.table_ref) else {
                return failed_result(e, gold, "missing table");
            };
            let v = verify_claim(&e.statement_or_question, table, gateway, policy);
            let y = u8::from(v.outcome.label().is_some() && v.outcome.label() == e.label);
            let outcome = match v.outcome {
                Outcome::Entailed => "entailed",
                Outcome::Refuted => "refuted",
                Outcome::Failed => "failed",
            };
            EntryResult {
                id: e.id.clone(),
                query: v.query,
                trace: v.trace,
                outcome: outcome.into(),
                predicted: None,
                gold,
                y,
                error_kinds: v.error_kinds,
            }
        }
        Mode::Qa => {
            let gold = e.answer.clone().unwrap_or_default();
            let Some(table) = catalog.get(&e.table_ref) else {
                return failed_result(e, gold, "missing table");
            };
            let a = answer_question(&e.statement_or_question, table, gateway, policy);
            let y = u8::from(a.value.as_ref().is_some_and(|v| match_answer(v, &gold)));
            let outcome = if a.value.is_some() {
                "answered"
            } else {
                "failed"
            };
            EntryResult {
                id: e.id.clone(),
                query: a.query,
                trace: a.trace,
                outcome: outcome.into(),
                predicted: a.value.as_ref().map(Value::render),
                gold,
                y,
                error_kinds: a.error_kinds,
            }
        }
    }
}

/// Scores every entry; failed verdicts and answers count as incorrect.
pub fn evaluate(
    dataset: &[DatasetEntry],
    catalog: &TableCatalog,
    gateway: &Gateway,
    policy: &CorrectionPolicy,
    mode: Mode,
    workers: usize,
) -> Result<Evaluation, VerifyError> {
    if let Some(e) = dataset.iter().find(|e| e.mode != mode) {
        return Err(VerifyError::ModeMismatch {
            id: e.id.clone(),
            expected: mode,
            found: e.mode,
        });
    }
    let results = par_map(dataset, workers, |e| {
        score_entry(e, catalog, gateway, policy)
    });
    Ok(Evaluation {
        report: Report::from_results(mode, &results),
        results,
    })
}

impl Evaluation {
    /// Same results, report recomputed under `scoring`.
    pub fn rescored(mut self, scoring: FailureScoring) -> Evaluation {
        self.report = Report::scored(self.report.mode, &self.results, scoring);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRun {
    pub no_corr: Evaluation,
    pub with_corr: Evaluation,
    /// The corrected run's report, carrying both accuracies.
    pub report: Report,
}

/// Evaluates with corrections off, then on, against the same gateway.
pub fn run_ablation(
    dataset: &[DatasetEntry],
    catalog: &TableCatalog,
    gateway: &Gateway,
    policy: &CorrectionPolicy,
    mode: Mode,
    workers: usize,
) -> Result<AblationRun, VerifyError> {
    let no_corr = evaluate(
        dataset,
        catalog,
        gateway,
        &policy.without_corrections(),
        mode,
        workers,
    )?;
    let with_corr = evaluate(dataset, catalog, gateway, policy, mode, workers)?;
    Ok(AblationRun::pair(no_corr, with_corr))
}

impl AblationRun {
    fn pair(no_corr: Evaluation, with_corr: Evaluation) -> AblationRun {
        let mut report = with_corr.report.clone();
        report.ablation = Some(Ablation {
            no_corr: no_corr.report.accuracy,
            with_corr: with_corr.report.accuracy,
        });
        AblationRun {
            no_corr,
            with_corr,
            report,
        }
    }

    pub fn rescored(self, scoring: FailureScoring) -> AblationRun {
        AblationRun::pair(
            self.no_corr.rescored(scoring),
            self.with_corr.rescored(scoring),
        )
    }
}
