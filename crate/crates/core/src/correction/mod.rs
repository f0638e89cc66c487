//! Logic correction, syntax correction and filtering of candidate queries.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::expr::{execute_answer, execute_verdict, EvalError};
use crate::forge::{DatasetEntry, Label, Mode, TableCatalog};
use crate::gateway::{Gateway, GatewayError, PromptKind, Slot, Slots};
use crate::table::{render_for_prompt, RenderLimits, Table};
use crate::verifier::match_answer;

/// Longest error text embedded in a correction prompt, in characters.
pub const ERROR_PROMPT_CHARS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Enabled {
    pub logic: bool,
    pub syntax: bool,
    pub filter: bool,
}

impl Default for Enabled {
    fn default() -> Self {
        Enabled {
            logic: true,
            syntax: true,
            filter: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrectionPolicy {
    pub syntax_budget: u32,
    pub logic_passes: u32,
    pub enabled: Enabled,
}

impl Default for CorrectionPolicy {
    fn default() -> Self {
        CorrectionPolicy {
            syntax_budget: 4,
            logic_passes: 1,
            enabled: Enabled::default(),
        }
    }
}

impl CorrectionPolicy {
    /// Every pass switched off; candidates go through untouched.
    pub fn disabled() -> CorrectionPolicy {
        CorrectionPolicy {
            enabled: Enabled {
                logic: false,
                syntax: false,
                filter: false,
            },
            ..Default::default()
        }
    }

    pub fn without_corrections(self) -> CorrectionPolicy {
        CorrectionPolicy {
            enabled: Enabled {
                logic: false,
                syntax: false,
                ..self.enabled
            },
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Generated,
    LogicCorrected,
    SyntaxCorrected,
}

impl Origin {
    pub fn tag(self) -> &'static str {
        match self {
            Origin::Generated => "generated",
            Origin::LogicCorrected => "logic_corrected",
            Origin::SyntaxCorrected => "syntax_corrected",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Logic,
    Syntax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepOutcome {
    /// The returned query runs.
    Executable,
    /// The returned query runs and matches the label.
    Corrected,
    /// The returned query still fails to run.
    Failed,
    /// The returned query runs but disagrees with the label.
    Rejected,
    ExtractFailed,
    GatewayFailed,
}

/// One correction round trip.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub stage: Stage,
    pub attempt: u32,
    pub query: String,
    pub error: Option<String>,
    pub outcome: StepOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateQuery {
    pub source: String,
    pub origin: Origin,
    pub attempts: u32,
    pub last_error: Option<EvalError>,
    pub trace: Vec<TraceStep>,
}

impl CandidateQuery {
    pub fn generated(source: impl Into<String>) -> CandidateQuery {
        CandidateQuery {
            source: source.into(),
            origin: Origin::Generated,
            attempts: 0,
            last_error: None,
            trace: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason", content = "detail")]
pub enum FailureReason {
    BudgetExhausted,
    Gateway(String),
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureReason::BudgetExhausted => f.write_str("budget_exhausted"),
            FailureReason::Gateway(e) => write!(f, "gateway: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("syntax correction failed ({reason}) after {} attempts", candidate.attempts)]
pub struct Failure {
    pub reason: FailureReason,
    pub candidate: CandidateQuery,
}

/// What a query is checked against.
#[derive(Debug, Clone, Copy)]
pub enum Task<'a> {
    Fact { statement: &'a str },
    Qa { question: &'a str },
}

impl Task<'_> {
    /// Runs the query the way its consumer will: verdict or denotation.
    pub fn check(&self, query: &str, table: &Table) -> Result<(), EvalError> {
        match self {
            Task::Fact { .. } => execute_verdict(query, table).map(drop),
            Task::Qa { .. } => execute_answer(query, table).map(drop),
        }
    }

    fn slots(&self, table_text: &str) -> Slots {
        let mut slots = Slots::new();
        slots.insert(Slot::Table, table_text.to_string());
        match self {
            Task::Fact { statement } => slots.insert(Slot::Statement, statement.to_string()),
            Task::Qa { question } => slots.insert(Slot::Question, question.to_string()),
        };
        slots
    }

    fn syntax_prompt(&self) -> PromptKind {
        match self {
            Task::Fact { .. } => PromptKind::FactSyntaxCorrect,
            Task::Qa { .. } => PromptKind::QaSyntaxCorrect,
        }
    }
}

pub fn truncate_error(message: &str) -> String {
    message.chars().take(ERROR_PROMPT_CHARS).collect()
}

/// Feeds execution errors back to the model until the query runs or the
/// budget is spent. `Ok` with `last_error` set means syntax correction is
/// disabled and the query still fails.
pub fn run_syntax_loop(
    mut candidate: CandidateQuery,
    task: Task<'_>,
    table: &Table,
    gateway: &Gateway,
    policy: &CorrectionPolicy,
) -> Result<CandidateQuery, Box<Failure>> {
    let mut error = match task.check(&candidate.source, table) {
        Ok(()) => {
            candidate.last_error = None;
            return Ok(candidate);
        }
        Err(e) => e,
    };
    candidate.last_error = Some(error.clone());
    if !policy.enabled.syntax {
        return Ok(candidate);
    }
    let table_text = render_for_prompt(table, RenderLimits::default());
    while candidate.attempts < policy.syntax_budget {
        candidate.attempts += 1;
        let mut slots = task.slots(&table_text);
        slots.insert(Slot::Query, candidate.source.clone());
        slots.insert(Slot::Error, truncate_error(&error.to_string()));
        let step = |query: String, error: Option<String>, outcome| TraceStep {
            stage: Stage::Syntax,
            attempt: candidate.attempts,
            query,
            error,
            outcome,
        };
        match gateway.generate(task.syntax_prompt(), &slots) {
            Ok(query) => match task.check(&query, table) {
                Ok(()) => {
                    let s = step(query.clone(), None, StepOutcome::Executable);
                    candidate.trace.push(s);
                    candidate.source = query;
                    candidate.origin = Origin::SyntaxCorrected;
                    candidate.last_error = None;
                    return Ok(candidate);
                }
                Err(e) => {
                    let s = step(query.clone(), Some(e.to_string()), StepOutcome::Failed);
                    candidate.trace.push(s);
                    candidate.source = query;
                    candidate.origin = Origin::SyntaxCorrected;
                    candidate.last_error = Some(e.clone());
                    error = e;
                }
            },
            Err(GatewayError::Extract(x)) => {
                let s = step(
                    candidate.source.clone(),
                    Some(x.to_string()),
                    StepOutcome::ExtractFailed,
                );
                candidate.trace.push(s);
            }
            Err(other) => {
                let s = step(
                    candidate.source.clone(),
                    Some(other.to_string()),
                    StepOutcome::GatewayFailed,
                );
                candidate.trace.push(s);
                return Err(Box::new(Failure {
                    reason: FailureReason::Gateway(other.to_string()),
                    candidate,
                }));
            }
        }
    }
    Err(Box::new(Failure {
        reason: FailureReason::BudgetExhausted,
        candidate,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogicStatus {
    /// Nothing to do: correction off, query failing, or already matching.
    Unchanged,
    Corrected,
    /// The model's replacements did not match the label; original kept.
    Uncorrected,
    GatewayFailed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicOutcome {
    pub entry: DatasetEntry,
    pub status: LogicStatus,
    pub trace: Vec<TraceStep>,
}

fn label_text(label: Label) -> &'static str {
    if label.as_bool() {
        "True"
    } else {
        "False"
    }
}

/// Asks the model to fix an executable query whose verdict contradicts the
/// gold label. A replacement is adopted only if it runs and matches.
pub fn run_logic_pass(
    entry: DatasetEntry,
    table: &Table,
    gateway: &Gateway,
    policy: &CorrectionPolicy,
) -> LogicOutcome {
    let unchanged = |entry| LogicOutcome {
        entry,
        status: LogicStatus::Unchanged,
        trace: Vec::new(),
    };
    let Some(label) = entry.label else {
        return unchanged(entry);
    };
    if !policy.enabled.logic || policy.logic_passes == 0 {
        return unchanged(entry);
    }
    match execute_verdict(&entry.query, table) {
        Ok(v) if v != label.as_bool() => {}
        _ => return unchanged(entry),
    }
    let mut slots = Slots::new();
    slots.insert(
        Slot::Table,
        render_for_prompt(table, RenderLimits::default()),
    );
    slots.insert(Slot::Statement, entry.statement_or_question.clone());
    slots.insert(Slot::Query, entry.query.clone());
    slots.insert(Slot::Label, label_text(label).to_string());
    let mut trace = Vec::new();
    for attempt in 1..=policy.logic_passes {
        let step = |query: String, error: Option<String>, outcome| TraceStep {
            stage: Stage::Logic,
            attempt,
            query,
            error,
            outcome,
        };
        match gateway.generate(PromptKind::FactLogicCorrect, &slots) {
            Ok(query) => match execute_verdict(&query, table) {
                Ok(v) if v == label.as_bool() => {
                    trace.push(step(query.clone(), None, StepOutcome::Corrected));
                    let mut entry = entry;
                    entry.query = query;
                    entry.tag(Origin::LogicCorrected.tag());
                    return LogicOutcome {
                        entry,
                        status: LogicStatus::Corrected,
                        trace,
                    };
                }
                Ok(_) => trace.push(step(query, None, StepOutcome::Rejected)),
                Err(e) => trace.push(step(query, Some(e.to_string()), StepOutcome::Failed)),
            },
            Err(GatewayError::Extract(x)) => trace.push(step(
                entry.query.clone(),
                Some(x.to_string()),
                StepOutcome::ExtractFailed,
            )),
            Err(other) => {
                trace.push(step(
                    entry.query.clone(),
                    Some(other.to_string()),
                    StepOutcome::GatewayFailed,
                ));
                return LogicOutcome {
                    entry,
                    status: LogicStatus::GatewayFailed,
                    trace,
                };
            }
        }
    }
    LogicOutcome {
        entry,
        status: LogicStatus::Uncorrected,
        trace,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    ExecError,
    LabelMismatch,
    AnswerMismatch,
    GenerationFailed,
    MissingTable,
}

impl DropReason {
    pub fn name(self) -> &'static str {
        match self {
            DropReason::ExecError => "exec_error",
            DropReason::LabelMismatch => "label_mismatch",
            DropReason::AnswerMismatch => "answer_mismatch",
            DropReason::GenerationFailed => "generation_failed",
            DropReason::MissingTable => "missing_table",
        }
    }
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dropped {
    pub entry: DatasetEntry,
    pub reason: DropReason,
    pub detail: String,
}

/// Checks that an entry's query runs and agrees with its gold label or
/// answer.
pub fn check_entry(entry: &DatasetEntry, table: &Table) -> Result<(), (DropReason, String)> {
    match entry.mode {
        Mode::Fact => {
            let verdict = execute_verdict(&entry.query, table)
                .map_err(|e| (DropReason::ExecError, e.to_string()))?;
            match entry.label {
                Some(l) if l.as_bool() == verdict => Ok(()),
                Some(l) => Err((
                    DropReason::LabelMismatch,
                    format!("query says {}, label is {l}", Label::from_verdict(verdict)),
                )),
                None => Err((DropReason::LabelMismatch, "entry has no label".into())),
            }
        }
        Mode::Qa => {
            let value = execute_answer(&entry.query, table)
                .map_err(|e| (DropReason::ExecError, e.to_string()))?;
            match &entry.answer {
                Some(a) if match_answer(&value, a) => Ok(()),
                Some(a) => Err((
                    DropReason::AnswerMismatch,
                    format!("query returns {}, answer is '{a}'", value.render()),
                )),
                None => Err((DropReason::AnswerMismatch, "entry has no answer".into())),
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filtered {
    pub kept: Vec<DatasetEntry>,
    pub dropped: Vec<Dropped>,
}

/// Keeps exactly the entries whose query runs and matches gold.
pub fn filter_entries(entries: Vec<DatasetEntry>, catalog: &TableCatalog) -> Filtered {
    let mut out = Filtered::default();
    for entry in entries {
        let Some(table) = catalog.get(&entry.table_ref) else {
            let detail = format!("table '{}' not in catalog", entry.table_ref);
            out.dropped.push(Dropped {
                entry,
                reason: DropReason::MissingTable,
                detail,
            });
            continue;
        };
        match check_entry(&entry, table) {
            Ok(()) => out.kept.push(entry),
            Err((reason, detail)) => out.dropped.push(Dropped {
                entry,
                reason,
                detail,
            }),
        }
    }
    out
}
