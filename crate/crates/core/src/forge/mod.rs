//! Dataset construction: generated fact and QA datasets, claims derived from
//! QA pairs, and the balanced true/false evaluation set.

mod corpus;
mod entry;
mod io;
mod stats;

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use corpus::{load_tabfact, load_wtq, FactRecord, QaRecord};
pub use entry::{DatasetEntry, Label, Mode, TableCatalog};
pub use io::{read_jsonl, write_atomic, write_jsonl};
pub use stats::{pct, StageCount, StageStats, STAGES};

use crate::correction::{
    check_entry, filter_entries, run_logic_pass, run_syntax_loop, CandidateQuery, CorrectionPolicy,
    DropReason, Dropped, Enabled, Task, TraceStep,
};
use crate::gateway::{perturb_statement, Gateway, GatewayError, PromptKind, Slot, Slots};
use crate::table::{render_for_prompt, RenderLimits, Table};
use crate::verifier::gold_items;

pub const PANWIKI_TARGET: usize = 1200;

#[derive(Debug, thiserror::Error)]
pub enum ForgeError {
    #[error("cannot access {}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("corpus error: {0}")]
    Corpus(String),
    #[error("need {wanted} verified pairs but only {found} could be built")]
    NotEnoughCandidates { wanted: usize, found: usize },
}

/// A correction step tagged with the entry it belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryTrace {
    pub id: String,
    #[serde(flatten)]
    pub step: TraceStep,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildOutput {
    pub kept: Vec<DatasetEntry>,
    pub dropped: Vec<Dropped>,
    pub stats: Option<StageStats>,
    pub traces: Vec<EntryTrace>,
}

impl BuildOutput {
    pub fn drop_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for d in &self.dropped {
            *out.entry(d.reason.name().to_string()).or_insert(0) += 1;
        }
        out
    }
}

/// Written next to every dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub dataset: String,
    pub seed: u64,
    pub policy: CorrectionPolicy,
    pub model_config_hash: Option<String>,
    pub source_count: usize,
    pub kept_count: usize,
    pub dropped: BTreeMap<String, usize>,
    pub stats: Option<StageStats>,
}

/// Runs `f` over `items` on `workers` threads, keeping input order.
pub(crate) fn par_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
    {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}

fn prompt_slots(table: &Table) -> Slots {
    let mut slots = Slots::new();
    slots.insert(
        Slot::Table,
        render_for_prompt(table, RenderLimits::default()),
    );
    slots
}

struct RecordOutcome {
    entry: Result<DatasetEntry, Dropped>,
    valid: [bool; 3],
    traces: Vec<EntryTrace>,
}

fn failed(entry: DatasetEntry, reason: DropReason, detail: String) -> RecordOutcome {
    RecordOutcome {
        entry: Err(Dropped {
            entry,
            reason,
            detail,
        }),
        valid: [false; 3],
        traces: Vec::new(),
    }
}

fn tagged(id: &str, steps: Vec<TraceStep>) -> impl Iterator<Item = EntryTrace> + '_ {
    steps.into_iter().map(move |step| EntryTrace {
        id: id.to_string(),
        step,
    })
}

fn fact_record(
    record: &FactRecord,
    catalog: &TableCatalog,
    gateway: &Gateway,
    policy: &CorrectionPolicy,
) -> RecordOutcome {
    let mut entry = DatasetEntry::fact(
        &record.id,
        &record.statement,
        &record.table_ref,
        record.label,
    );
    let Some(table) = catalog.get(&record.table_ref) else {
        let detail = format!("table '{}' not in catalog", record.table_ref);
        return failed(entry, DropReason::MissingTable, detail);
    };
    let mut slots = prompt_slots(table);
    slots.insert(Slot::Statement, record.statement.clone());
    match gateway.generate(PromptKind::FactGenerate, &slots) {
        Ok(q) => entry.query = q,
        Err(e) => return failed(entry, DropReason::GenerationFailed, e.to_string()),
    }
    entry.tag("generated");
    let mut valid = [false; 3];
    let mut traces = Vec::new();
    valid[0] = check_entry(&entry, table).is_ok();

    let logic = run_logic_pass(entry, table, gateway, policy);
    entry = logic.entry;
    traces.extend(tagged(&record.id, logic.trace));
    valid[1] = check_entry(&entry, table).is_ok();

    let task = Task::Fact {
        statement: &record.statement,
    };
    if policy.enabled.syntax && task.check(&entry.query, table).is_err() {
        let steps = match run_syntax_loop(
            CandidateQuery::generated(entry.query.clone()),
            task,
            table,
            gateway,
            policy,
        ) {
            Ok(c) => {
                if c.last_error.is_none() && c.attempts > 0 {
                    entry.query = c.source;
                    entry.tag("syntax_corrected");
                }
                c.trace
            }
            Err(f) => f.candidate.trace,
        };
        traces.extend(tagged(&record.id, steps));
    }
    valid[2] = check_entry(&entry, table).is_ok();
    RecordOutcome {
        entry: Ok(entry),
        valid,
        traces,
    }
}

fn assemble(outcomes: Vec<RecordOutcome>, catalog: &TableCatalog, filter: bool) -> BuildOutput {
    let total = outcomes.len();
    let mut counts = [0usize; 3];
    let mut out = BuildOutput::default();
    let mut candidates = Vec::new();
    for o in outcomes {
        for (c, v) in counts.iter_mut().zip(o.valid) {
            *c += usize::from(v);
        }
        out.traces.extend(o.traces);
        match o.entry {
            Ok(e) => candidates.push(e),
            Err(d) => out.dropped.push(d),
        }
    }
    if filter {
        let f = filter_entries(candidates, catalog);
        out.kept = f.kept;
        out.dropped.extend(f.dropped);
    } else {
        out.kept = candidates;
    }
    out.stats = Some(StageStats::from_counts(counts, total));
    out
}

/// Generates a query per statement, then applies logic correction, syntax
/// correction and filtering in that order.
pub fn build_pantabfact(
    records: &[FactRecord],
    catalog: &TableCatalog,
    gateway: &Gateway,
    policy: &CorrectionPolicy,
    workers: usize,
) -> BuildOutput {
    let outcomes = par_map(records, workers, |r| {
        fact_record(r, catalog, gateway, policy)
    });
    assemble(outcomes, catalog, policy.enabled.filter)
}

/// Builder default for the QA dataset: generation and answer filtering only.
pub fn panwiki_policy() -> CorrectionPolicy {
    CorrectionPolicy {
        enabled: Enabled {
            logic: false,
            syntax: false,
            filter: true,
        },
        ..CorrectionPolicy::default()
    }
}

fn qa_record(
    record: &QaRecord,
    catalog: &TableCatalog,
    gateway: &Gateway,
    policy: &CorrectionPolicy,
) -> RecordOutcome {
    let mut entry = DatasetEntry::qa(
        &record.id,
        &record.question,
        &record.table_ref,
        &record.answer,
    );
    let Some(table) = catalog.get(&record.table_ref) else {
        let detail = format!("table '{}' not in catalog", record.table_ref);
        return failed(entry, DropReason::MissingTable, detail);
    };
    let mut slots = prompt_slots(table);
    slots.insert(Slot::Question, record.question.clone());
    slots.insert(Slot::Answer, record.answer.clone());
    match gateway.generate(PromptKind::QaGenerate, &slots) {
        Ok(q) => entry.query = q,
        Err(e) => return failed(entry, DropReason::GenerationFailed, e.to_string()),
    }
    entry.tag("generated");
    let initial = check_entry(&entry, table).is_ok();
    let mut traces = Vec::new();
    let task = Task::Qa {
        question: &record.question,
    };
    if policy.enabled.syntax && task.check(&entry.query, table).is_err() {
        let steps = match run_syntax_loop(
            CandidateQuery::generated(entry.query.clone()),
            task,
            table,
            gateway,
            policy,
        ) {
            Ok(c) => {
                if c.last_error.is_none() && c.attempts > 0 {
                    entry.query = c.source;
                    entry.tag("syntax_corrected");
                }
                c.trace
            }
            Err(f) => f.candidate.trace,
        };
        traces.extend(tagged(&record.id, steps));
    }
    let after = check_entry(&entry, table).is_ok();
    RecordOutcome {
        entry: Ok(entry),
        valid: [initial, initial, after],
        traces,
    }
}

/// Generates a query per question and keeps entries whose result matches
/// the gold answer, stopping once `target` entries are kept.
pub fn build_panwiki(
    records: &[QaRecord],
    catalog: &TableCatalog,
    gateway: &Gateway,
    policy: &CorrectionPolicy,
    workers: usize,
    target: Option<usize>,
) -> BuildOutput {
    let chunk = workers.max(1) * 8;
    let mut outcomes = Vec::new();
    let mut matching = 0;
    for part in records.chunks(chunk) {
        if target.is_some_and(|t| matching >= t) {
            break;
        }
        let done = par_map(part, workers, |r| qa_record(r, catalog, gateway, policy));
        matching += done.iter().filter(|o| o.valid[2]).count();
        outcomes.extend(done);
    }
    // answer matching is what defines this dataset, so it always filters
    let mut out = assemble(outcomes, catalog, true);
    if let Some(t) = target {
        out.kept.truncate(t);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skipped {
    pub id: String,
    pub reason: String,
}

/// Claim text used when no model is available.
pub fn fallback_claim(question: &str, answer: &str) -> String {
    let items: Vec<String> = gold_items(answer)
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect();
    format!("the answer to: {} is {}", question.trim(), items.join(", "))
}

/// Turns each QA pair into an entailed claim asserting its answer.
pub fn derive_wikifact(
    records: &[QaRecord],
    catalog: &TableCatalog,
    gateway: Option<&Gateway>,
    workers: usize,
) -> (Vec<DatasetEntry>, Vec<Skipped>) {
    let results = par_map(records, workers, |r| {
        if gold_items(&r.answer).iter().all(|s| s.is_empty()) {
            return Err(Skipped {
                id: r.id.clone(),
                reason: "empty_answer".into(),
            });
        }
        let from_model = gateway
            .zip(catalog.get(&r.table_ref))
            .and_then(|(gw, table)| {
                let mut slots = prompt_slots(table);
                slots.insert(Slot::Question, r.question.clone());
                slots.insert(Slot::Answer, r.answer.clone());
                gw.generate(PromptKind::ClaimConvert, &slots)
                    .ok()
                    .filter(|s| !s.is_empty())
            });
        let (claim, tag) = match from_model {
            Some(c) => (c, "claim_model"),
            None => (fallback_claim(&r.question, &r.answer), "claim_rule"),
        };
        let mut e = DatasetEntry::fact(&r.id, claim, &r.table_ref, Label::Entailed);
        e.answer = Some(r.answer.clone());
        e.tag(tag);
        Ok(e)
    });
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(e) => entries.push(e),
            Err(s) => skipped.push(s),
        }
    }
    (entries, skipped)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OodOptions {
    pub n: usize,
    pub seed: u64,
    /// Perturbation attempts per sampled claim before moving on.
    pub max_resamples: usize,
}

impl Default for OodOptions {
    fn default() -> Self {
        OodOptions {
            n: 300,
            seed: 0,
            max_resamples: 3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalancedOod {
    /// Each sampled claim followed by its refuted twin.
    pub entries: Vec<DatasetEntry>,
    pub skipped: Vec<Skipped>,
}

/// Samples `n` entailed claims with a seeded shuffle and pairs each with a
/// perturbed claim whose check query executes to False.
pub fn build_balanced_ood(
    wikifact: &[DatasetEntry],
    catalog: &TableCatalog,
    gateway: &Gateway,
    options: &OodOptions,
) -> Result<BalancedOod, ForgeError> {
    let n = options.n;
    if n > wikifact.len() {
        return Err(ForgeError::NotEnoughCandidates {
            wanted: n,
            found: wikifact.len(),
        });
    }
    let mut order: Vec<usize> = (0..wikifact.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(options.seed));
    let mut out = BalancedOod::default();
    let mut pairs = 0;
    for i in order {
        if pairs == n {
            break;
        }
        let original = &wikifact[i];
        let Some(table) = catalog.get(&original.table_ref) else {
            out.skipped.push(Skipped {
                id: original.id.clone(),
                reason: DropReason::MissingTable.name().into(),
            });
            continue;
        };
        let mut last: Option<GatewayError> = None;
        let mut twin = None;
        for _ in 0..options.max_resamples.max(1) {
            match perturb_statement(gateway, &original.statement_or_question, table) {
                Ok(p) => {
                    twin = Some(p);
                    break;
                }
                Err(e @ GatewayError::Precondition(_)) => {
                    last = Some(e);
                    break;
                }
                Err(e) => last = Some(e),
            }
        }
        let Some(p) = twin else {
            let reason = last.map_or_else(|| "perturbation failed".to_string(), |e| e.to_string());
            out.skipped.push(Skipped {
                id: original.id.clone(),
                reason,
            });
            continue;
        };
        let mut kept = original.clone();
        kept.label = Some(Label::Entailed);
        kept.tag("sampled");
        let mut refuted = DatasetEntry::fact(
            format!("{}-perturbed", original.id),
            p.statement,
            &original.table_ref,
            Label::Refuted,
        )
        .with_query(p.check_query);
        refuted.provenance = original.provenance.clone();
        refuted.tag("perturbed");
        out.entries.push(kept);
        out.entries.push(refuted);
        pairs += 1;
    }
    if pairs < n {
        return Err(ForgeError::NotEnoughCandidates {
            wanted: n,
            found: pairs,
        });
    }
    Ok(out)
}

/// Re-runs every kept entry; returns the ids that no longer verify.
pub fn reverify(entries: &[DatasetEntry], catalog: &TableCatalog) -> Vec<String> {
    entries
        .iter()
        .filter(|e| {
            catalog
                .get(&e.table_ref)
                .is_none_or(|t| check_entry(e, t).is_err())
        })
        .map(|e| e.id.clone())
        .collect()
}
