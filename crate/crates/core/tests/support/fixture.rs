//! Small tables with statements and questions whose labels and answers are
//! computed here from the raw rows, plus scripted chat models keyed on them.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde_json::json;
use tabexec::forge::{DatasetEntry, FactRecord, Label, QaRecord, TableCatalog};
use tabexec::gateway::stub::FnModel;
use tabexec::gateway::{ChatModel, ChatRequest, Gateway, ModelConfig, PromptKind, Slot};
use tabexec::Table;

pub const NEGATION: &str = "it is not the case that ";

struct Source {
    name: &'static str,
    key: &'static str,
    group: &'static str,
    nums: [&'static str; 2],
    rows: &'static [(&'static str, &'static str, [i64; 2])],
}

const SOURCES: &[Source] = &[
    Source {
        name: "players",
        key: "player",
        group: "team",
        nums: ["points", "age"],
        rows: &[
            ("ann", "red", [12, 24]),
            ("bob", "blue", [7, 31]),
            ("cid", "red", [20, 27]),
            ("dee", "green", [15, 22]),
            ("eve", "blue", [9, 29]),
            ("fay", "green", [20, 35]),
        ],
    },
    Source {
        name: "cities",
        key: "city",
        group: "continent",
        nums: ["population", "founded"],
        rows: &[
            ("oslo", "europe", [700_000, 1040]),
            ("rome", "europe", [2_800_000, -753]),
            ("lima", "america", [9_700_000, 1535]),
            ("kyiv", "europe", [2_900_000, 482]),
            ("quito", "america", [2_700_000, 1534]),
        ],
    },
    Source {
        name: "films",
        key: "title",
        group: "studio",
        nums: ["year", "minutes"],
        rows: &[
            ("alpha", "north", [1999, 120]),
            ("beta", "south", [2004, 95]),
            ("gamma", "north", [2004, 140]),
            ("delta", "east", [2010, 88]),
        ],
    },
];

impl Source {
    fn table_ref(&self) -> String {
        format!("{}.csv", self.name)
    }

    fn table(&self) -> Table {
        let header = vec![
            self.key.to_string(),
            self.group.to_string(),
            self.nums[0].to_string(),
            self.nums[1].to_string(),
        ];
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|(k, g, n)| {
                vec![
                    k.to_string(),
                    g.to_string(),
                    n[0].to_string(),
                    n[1].to_string(),
                ]
            })
            .collect();
        Table::from_text_rows(self.name, &header, &rows, &[""]).unwrap()
    }

    fn col(&self, c: usize) -> Vec<i64> {
        self.rows.iter().map(|r| r.2[c]).collect()
    }
}

#[derive(Debug, Clone)]
pub struct FactCase {
    pub id: String,
    pub table_ref: String,
    pub statement: String,
    pub label: bool,
    pub gold: String,
}

#[derive(Debug, Clone)]
pub struct QaCase {
    pub id: String,
    pub table_ref: String,
    pub question: String,
    pub answer: String,
    pub gold: String,
}

pub struct Fixture {
    pub catalog: TableCatalog,
    pub facts: Vec<FactCase>,
    pub questions: Vec<QaCase>,
}

fn fact_pool() -> Vec<(String, String, bool, String)> {
    let mut out = Vec::new();
    for s in SOURCES {
        let t = s.table_ref();
        let mut push =
            |stmt: String, label: bool, gold: String| out.push((t.clone(), stmt, label, gold));
        for c in 0..2 {
            let col = s.nums[c];
            let vals = s.col(c);
            for (i, (k, _, n)) in s.rows.iter().enumerate() {
                let v = if i % 2 == 0 { n[c] } else { n[c] + 1 };
                push(
                    format!("{k} has a {col} of {v}"),
                    v == n[c],
                    format!("df[df['{}'] == '{k}']['{col}'].iloc[0] == {v}", s.key),
                );
            }
            let max = *vals.iter().max().unwrap();
            push(
                format!("the highest {col} is {max}"),
                true,
                format!("df['{col}'].max() == {max}"),
            );
            push(
                format!("the highest {col} is {}", max + 1),
                false,
                format!("df['{col}'].max() == {}", max + 1),
            );
            let min = *vals.iter().min().unwrap();
            push(
                format!("the lowest {col} is {}", min - 1),
                false,
                format!("df['{col}'].min() == {}", min - 1),
            );
            push(
                format!("the lowest {col} is {min}"),
                true,
                format!("df['{col}'].min() == {min}"),
            );
            let sum: i64 = vals.iter().sum();
            push(
                format!("the total {col} is {sum}"),
                true,
                format!("df['{col}'].sum() == {sum}"),
            );
            push(
                format!("the total {col} is {}", sum + 1),
                false,
                format!("df['{col}'].sum() == {}", sum + 1),
            );
            let (a, b) = (&s.rows[0], &s.rows[1]);
            push(
                format!("{} has a higher {col} than {}", a.0, b.0),
                a.2[c] > b.2[c],
                format!("df[df['{k}'] == '{}']['{col}'].iloc[0] > df[df['{k}'] == '{}']['{col}'].iloc[0]", a.0, b.0, k = s.key),
            );
        }
        let mut groups: Vec<&str> = s.rows.iter().map(|r| r.1).collect();
        groups.sort();
        groups.dedup();
        for (i, (k, g, _)) in s.rows.iter().enumerate() {
            let other = groups[(groups.iter().position(|x| x == g).unwrap() + 1) % groups.len()];
            let gold = |grp: &str| {
                format!(
                    "df[df['{}'] == '{k}']['{}'].iloc[0] == '{grp}'",
                    s.key, s.group
                )
            };
            push(format!("{k} belongs to {g}"), true, gold(g));
            push(format!("{k} belongs to {other}"), false, gold(other));
            if i == 0 {
                let n = s.rows.len();
                push(
                    format!("the table lists {n} entries"),
                    true,
                    format!("len(df) == {n}"),
                );
                push(
                    format!("the table lists {} entries", n + 2),
                    false,
                    format!("len(df) == {}", n + 2),
                );
            }
        }
        for (i, g) in groups.iter().enumerate() {
            let count = s.rows.iter().filter(|r| r.1 == *g).count();
            let claimed = if i % 2 == 0 { count } else { count + 1 };
            push(
                format!("{g} appears in {claimed} rows"),
                claimed == count,
                format!("len(df[df['{}'] == '{g}']) == {claimed}", s.group),
            );
        }
    }
    out
}

fn qa_pool() -> Vec<(String, String, String, String)> {
    let mut out = Vec::new();
    for s in SOURCES {
        let t = s.table_ref();
        let mut push = |q: String, a: String, gold: String| out.push((t.clone(), q, a, gold));
        for c in 0..2 {
            let col = s.nums[c];
            let vals = s.col(c);
            for (k, _, n) in s.rows {
                push(
                    format!("what is the {col} of {k}"),
                    n[c].to_string(),
                    format!("df[df['{}'] == '{k}']['{col}'].iloc[0]", s.key),
                );
            }
            let max = *vals.iter().max().unwrap();
            let top: Vec<&str> = s
                .rows
                .iter()
                .filter(|r| r.2[c] == max)
                .map(|r| r.0)
                .collect();
            push(
                format!("which {} has the highest {col}", s.key),
                top.join("|"),
                format!("df[df['{col}'] == df['{col}'].max()]['{}']", s.key),
            );
            push(
                format!("what is the total {col}"),
                vals.iter().sum::<i64>().to_string(),
                format!("df['{col}'].sum()"),
            );
            let mut sorted = vals.clone();
            sorted.sort();
            let t = sorted[sorted.len() / 2];
            let above: Vec<&str> = s.rows.iter().filter(|r| r.2[c] > t).map(|r| r.0).collect();
            if !above.is_empty() {
                push(
                    format!("which {} entries have {col} above {t}", s.key),
                    above.join("|"),
                    format!("df[df['{col}'] > {t}]['{}']", s.key),
                );
            }
        }
        let g = s.rows[0].1;
        let count = s.rows.iter().filter(|r| r.1 == g).count();
        push(
            format!("how many rows have {} {g}", s.group),
            count.to_string(),
            format!("len(df[df['{}'] == '{g}'])", s.group),
        );
    }
    out
}

/// At most `n_facts` statements and `n_questions` questions, taken
/// round-robin over the tables so every table is used.
pub fn fixture(n_facts: usize, n_questions: usize) -> Fixture {
    let mut catalog = TableCatalog::new();
    for s in SOURCES {
        catalog.insert(s.table_ref(), s.table());
    }
    let facts = interleave(fact_pool(), |(t, ..)| t.clone())
        .into_iter()
        .take(n_facts)
        .enumerate()
        .map(|(i, (table_ref, statement, label, gold))| FactCase {
            id: format!("f{i}"),
            table_ref,
            statement,
            label,
            gold,
        })
        .collect();
    let questions = interleave(qa_pool(), |(t, ..)| t.clone())
        .into_iter()
        .take(n_questions)
        .enumerate()
        .map(|(i, (table_ref, question, answer, gold))| QaCase {
            id: format!("q{i}"),
            table_ref,
            question,
            answer,
            gold,
        })
        .collect();
    Fixture {
        catalog,
        facts,
        questions,
    }
}

fn interleave<T, K: Eq + Clone>(items: Vec<T>, key: impl Fn(&T) -> K) -> Vec<T> {
    let mut buckets: Vec<(K, std::collections::VecDeque<T>)> = Vec::new();
    for item in items {
        let k = key(&item);
        match buckets.iter_mut().find(|(b, _)| *b == k) {
            Some((_, q)) => q.push_back(item),
            None => buckets.push((k, [item].into())),
        }
    }
    let mut out = Vec::new();
    while buckets.iter().any(|(_, q)| !q.is_empty()) {
        for (_, q) in &mut buckets {
            if let Some(x) = q.pop_front() {
                out.push(x);
            }
        }
    }
    out
}

fn label(b: bool) -> Label {
    if b {
        Label::Entailed
    } else {
        Label::Refuted
    }
}

impl Fixture {
    pub fn fact_records(&self) -> Vec<FactRecord> {
        self.facts
            .iter()
            .map(|f| FactRecord {
                id: f.id.clone(),
                statement: f.statement.clone(),
                table_ref: f.table_ref.clone(),
                label: label(f.label),
            })
            .collect()
    }

    pub fn qa_records(&self) -> Vec<QaRecord> {
        self.questions
            .iter()
            .map(|q| QaRecord {
                id: q.id.clone(),
                question: q.question.clone(),
                table_ref: q.table_ref.clone(),
                answer: q.answer.clone(),
            })
            .collect()
    }

    /// The first `n / 2` entailed and `n / 2` refuted statements.
    pub fn balanced_facts(&self, n: usize) -> Vec<DatasetEntry> {
        let pick = |l: bool| self.facts.iter().filter(move |f| f.label == l).take(n / 2);
        let chosen: Vec<&FactCase> = pick(true).chain(pick(false)).collect();
        assert_eq!(
            chosen.len(),
            n / 2 * 2,
            "fixture has too few statements of one label"
        );
        chosen
            .into_iter()
            .map(|f| DatasetEntry::fact(&f.id, &f.statement, &f.table_ref, label(f.label)))
            .collect()
    }

    pub fn fact_entries(&self) -> Vec<DatasetEntry> {
        self.facts
            .iter()
            .map(|f| DatasetEntry::fact(&f.id, &f.statement, &f.table_ref, label(f.label)))
            .collect()
    }

    pub fn qa_entries(&self) -> Vec<DatasetEntry> {
        self.questions
            .iter()
            .map(|q| DatasetEntry::qa(&q.id, &q.question, &q.table_ref, &q.answer))
            .collect()
    }

    pub fn gold(&self) -> Arc<HashMap<String, String>> {
        Arc::new(
            self.facts
                .iter()
                .map(|f| (f.statement.clone(), f.gold.clone()))
                .chain(
                    self.questions
                        .iter()
                        .map(|q| (q.question.clone(), q.gold.clone())),
                )
                .chain(
                    self.questions
                        .iter()
                        .map(|q| (claim_text(&q.question, &q.answer), claim_query(q))),
                )
                .collect(),
        )
    }
}

/// What the scripted claim converter says for a question and answer.
pub fn claim_text(question: &str, answer: &str) -> String {
    format!("the answer to {question} is {answer}")
}

fn claim_query(q: &QaCase) -> String {
    if q.answer.parse::<i64>().is_ok() {
        return format!("{} == {}", q.gold, q.answer);
    }
    let items: Vec<String> = q.answer.split('|').map(|a| format!("'{a}'")).collect();
    format!("{}.isin([{}]).all()", q.gold, items.join(", "))
}

/// How a scripted model treats one subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Behaviour {
    Gold,
    /// First generation is syntactically broken.
    Broken,
    /// First generation runs but has the opposite truth value.
    Flipped,
    /// Reply without any JSON object.
    Rambling,
}

pub fn corrupt(query: &str, variant: u64) -> String {
    let broken = match variant % 4 {
        0 => format!("{query} )"),
        1 => query.replacen("==", "===", 1),
        2 => format!("{query}; import os"),
        _ => query.replacen("df", "frame", 1),
    };
    if broken == query {
        format!("({query}")
    } else {
        broken
    }
}

fn subject(request: &ChatRequest) -> String {
    request
        .slots
        .get(&Slot::Statement)
        .or_else(|| request.slots.get(&Slot::Question))
        .cloned()
        .unwrap_or_default()
}

fn hash(parts: &[&str], seed: u64) -> u64 {
    let mut h = DefaultHasher::new();
    seed.hash(&mut h);
    parts.hash(&mut h);
    h.finish()
}

/// Replies derived from gold queries. `behave` picks the first-attempt
/// behaviour per subject; `fixes` decides whether a correction request
/// (given the subject and the failing query) gets the gold query.
pub fn scripted(
    gold: Arc<HashMap<String, String>>,
    behave: impl Fn(&str) -> Behaviour + Send + Sync + 'static,
    fixes: impl Fn(&str, &str) -> bool + Send + Sync + 'static,
) -> impl ChatModel {
    FnModel(move |r: &ChatRequest| {
        let s = subject(r);
        let key = r.kind.payload_key();
        let reply = |q: String| Ok(json!({ key: q }).to_string());
        if let Some(original) = s.strip_prefix(NEGATION) {
            let g = gold
                .get(original)
                .cloned()
                .unwrap_or_else(|| "len(df) == -1".into());
            return reply(format!("not ({g})"));
        }
        let g = gold
            .get(&s)
            .cloned()
            .unwrap_or_else(|| "len(df) == -1".into());
        match r.kind {
            PromptKind::Perturb => reply(format!("{NEGATION}{s}")),
            PromptKind::ClaimConvert => reply(claim_text(&s, &r.slots[&Slot::Answer])),
            kind if kind.is_correction() => {
                let failing = r.slots.get(&Slot::Query).cloned().unwrap_or_default();
                if fixes(&s, &failing) {
                    reply(g)
                } else {
                    reply(corrupt(&g, hash(&[&s, &failing], 1)))
                }
            }
            _ => match behave(&s) {
                Behaviour::Gold => reply(g),
                Behaviour::Broken => reply(corrupt(&g, hash(&[&s], 0))),
                Behaviour::Flipped => reply(format!("not ({g})")),
                Behaviour::Rambling => Ok("I think the answer is probably yes.".to_string()),
            },
        }
    })
}

pub fn oracle(gold: Arc<HashMap<String, String>>) -> impl ChatModel {
    scripted(gold, |_| Behaviour::Gold, |_, _| true)
}

/// Seeded mix of behaviours; decisions depend only on the seed and the
/// request, so call order does not matter.
pub fn noisy(gold: Arc<HashMap<String, String>>, seed: u64) -> impl ChatModel {
    scripted(
        gold,
        move |s| match hash(&[s], seed) % 5 {
            0 | 1 => Behaviour::Gold,
            2 => Behaviour::Broken,
            3 => Behaviour::Flipped,
            _ => Behaviour::Rambling,
        },
        move |s, q| !hash(&[s, q], seed ^ 0xC0FFEE).is_multiple_of(3),
    )
}

pub fn gateway(model: impl ChatModel + 'static) -> Gateway {
    Gateway::new(
        model,
        ModelConfig {
            backoff_ms: 0,
            max_retries: 0,
            ..ModelConfig::default()
        },
    )
    .unwrap()
}
