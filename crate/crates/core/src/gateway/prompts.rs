use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Which template a request renders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    FactGenerate,
    FactLogicCorrect,
    FactSyntaxCorrect,
    QaGenerate,
    /// Question to query without a known answer, used at inference.
    QaInfer,
    QaSyntaxCorrect,
    Perturb,
    ClaimConvert,
}

/// A named input section of a prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Table,
    Statement,
    Question,
    Answer,
    Query,
    Error,
    Label,
}

impl Slot {
    fn heading(self) -> &'static str {
        match self {
            Slot::Table => "Table",
            Slot::Statement => "Statement",
            Slot::Question => "Question",
            Slot::Answer => "Answer",
            Slot::Query => "Pandas code",
            Slot::Error => "Error",
            Slot::Label => "Label",
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.heading())
    }
}

pub type Slots = BTreeMap<Slot, String>;

const FACT_GENERATE: &str = "You are a Python expert specializing in pandas. Your task is to translate the given natural language statement into a single-line pandas expression. \nThis expression must be valid and executable to verify the truth of the statement using the provided table.\nConsider the following:\n\n1. The table is represented as a pandas DataFrame named df.\n\n2. Do not include explanations, comments, or multiline outputs.\n\n3. Ensure the output is concise, correct, and when run outputs either True or False, and strictly in the following Json Format with a single key \"PANDA\":\n{\"PANDA\": \"<your Pandas code>\"}";

const FACT_LOGIC_CORRECT: &str = "You are an expert in Python with a specialization in pandas. Your task is to verify and correct a given pandas code that translates a natural language statement into a pandas expression. The corrected pandas code must accurately evaluate the truth of the statement when applied to the given table.\nRequirements:\n\n1. The table is represented as a pandas DataFrame named df.\n\n2. The pandas code must evaluate to a boolean value (True or False) using the snippet: str(bool(eval(pandas_code))).\n\n3. The corrected pandas code should match the truth value indicated by the provided \"Label\".\n\n4. Ensure the output is concise, correct, and when run outputs either True or False, and strictly in the following Json Format with a single key \"CORRECT PANDA\":\n{\"CORRECT PANDA\": \"<your Pandas code>\"}";

const FACT_SYNTAX_CORRECT: &str = "You are a Python expert specializing in pandas. Your task is to correct a pandas code that translates a given natural language statement into a pandas expression. The code, along with the specific error it contains, is provided. Your corrected pandas_code must be valid and executable by running the code snippet str(bool(eval(pandas_code))) ensuring it accurately evaluates the truth of the statement using the provided table with no errors.\n\nMake sure the pandas_code is of type boolean.\nConsider the following:\n\n1. The table is represented as a pandas DataFrame named df.\n\n2. Do not include explanations, comments, or multiline outputs.\n\n3. Ensure the output is concise, correct, and when run outputs either True or False, and strictly in the following Json Format with a single key \"CORRECT PANDA\":\n{\"CORRECT PANDA\": \"<your Pandas code>\"}";

const QA_GENERATE: &str = "You are a Python expert specializing in pandas. You are given a table, a question, and an answer. Your task is to translate the given natural language question into a single-line pandas expression. \nThis expression, which acts like a query, must be valid and executable so that running the pandas expression will output the answer to the question.\nConsider the following:\n\n1. The table is represented as a pandas DataFrame named df.\n\n2. Do not include explanations, comments, or multiline outputs.\n\n3. Ensure the output is concise, correct, and when run, it outputs the correct given answer, and strictly follows the Json format:\n{\"PANDA\": \"<your Pandas code>\"}";

const QA_INFER: &str = "You are a Python expert specializing in pandas. You are given a table and a question. Your task is to translate the given natural language question into a single-line pandas expression. \nThis expression, which acts like a query, must be valid and executable so that running the pandas expression will output the answer to the question.\nConsider the following:\n\n1. The table is represented as a pandas DataFrame named df.\n\n2. Do not include explanations, comments, or multiline outputs.\n\n3. Ensure the output is concise, correct, and strictly follows the Json format:\n{\"PANDA\": \"<your Pandas code>\"}";

const QA_SYNTAX_CORRECT: &str = "You are a Python expert specializing in pandas. Your task is to correct a pandas code that translates a given natural language question into a pandas expression. The code, along with the specific error it contains, is provided. Your corrected pandas_code must be valid and executable by running the code snippet eval(pandas_code) so that it outputs the answer to the question using the provided table with no errors.\nConsider the following:\n\n1. The table is represented as a pandas DataFrame named df.\n\n2. Do not include explanations, comments, or multiline outputs.\n\n3. Ensure the output is concise, correct, and strictly in the following Json Format with a single key \"CORRECT PANDA\":\n{\"CORRECT PANDA\": \"<your Pandas code>\"}";

const PERTURB: &str = "You are given a table and a statement that is true according to the table. Slightly modify the statement, altering one fact based on the table, so that the modified statement is contradicted by the table. Keep the rest of the wording unchanged.\nDo not include explanations, comments, or multiline outputs.\nRespond strictly in the following Json Format with a single key \"STATEMENT\":\n{\"STATEMENT\": \"<modified statement>\"}";

const CLAIM_CONVERT: &str = "You are given a table, a question about the table, and its answer. Rewrite the question and answer as one declarative factual statement that asserts the answer.\nDo not include explanations, comments, or multiline outputs.\nRespond strictly in the following Json Format with a single key \"STATEMENT\":\n{\"STATEMENT\": \"<statement>\"}";

impl PromptKind {
    pub const ALL: [PromptKind; 8] = [
        PromptKind::FactGenerate,
        PromptKind::FactLogicCorrect,
        PromptKind::FactSyntaxCorrect,
        PromptKind::QaGenerate,
        PromptKind::QaInfer,
        PromptKind::QaSyntaxCorrect,
        PromptKind::Perturb,
        PromptKind::ClaimConvert,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PromptKind::FactGenerate => "fact_generate",
            PromptKind::FactLogicCorrect => "fact_logic_correct",
            PromptKind::FactSyntaxCorrect => "fact_syntax_correct",
            PromptKind::QaGenerate => "qa_generate",
            PromptKind::QaInfer => "qa_infer",
            PromptKind::QaSyntaxCorrect => "qa_syntax_correct",
            PromptKind::Perturb => "perturb",
            PromptKind::ClaimConvert => "claim_convert",
        }
    }

    pub fn instruction(self) -> &'static str {
        match self {
            PromptKind::FactGenerate => FACT_GENERATE,
            PromptKind::FactLogicCorrect => FACT_LOGIC_CORRECT,
            PromptKind::FactSyntaxCorrect => FACT_SYNTAX_CORRECT,
            PromptKind::QaGenerate => QA_GENERATE,
            PromptKind::QaInfer => QA_INFER,
            PromptKind::QaSyntaxCorrect => QA_SYNTAX_CORRECT,
            PromptKind::Perturb => PERTURB,
            PromptKind::ClaimConvert => CLAIM_CONVERT,
        }
    }

    /// Slots the template needs, in the order they are rendered.
    pub fn required_slots(self) -> &'static [Slot] {
        match self {
            PromptKind::FactGenerate | PromptKind::Perturb => &[Slot::Table, Slot::Statement],
            PromptKind::FactLogicCorrect => {
                &[Slot::Table, Slot::Statement, Slot::Query, Slot::Label]
            }
            PromptKind::FactSyntaxCorrect => {
                &[Slot::Table, Slot::Statement, Slot::Query, Slot::Error]
            }
            PromptKind::QaGenerate | PromptKind::ClaimConvert => {
                &[Slot::Table, Slot::Question, Slot::Answer]
            }
            PromptKind::QaInfer => &[Slot::Table, Slot::Question],
            PromptKind::QaSyntaxCorrect => &[Slot::Table, Slot::Question, Slot::Query, Slot::Error],
        }
    }

    /// JSON key the model is asked to answer under.
    pub fn payload_key(self) -> &'static str {
        match self {
            PromptKind::FactGenerate | PromptKind::QaGenerate | PromptKind::QaInfer => "PANDA",
            PromptKind::FactLogicCorrect
            | PromptKind::FactSyntaxCorrect
            | PromptKind::QaSyntaxCorrect => "CORRECT PANDA",
            PromptKind::Perturb | PromptKind::ClaimConvert => "STATEMENT",
        }
    }

    pub fn is_correction(self) -> bool {
        matches!(
            self,
            PromptKind::FactLogicCorrect
                | PromptKind::FactSyntaxCorrect
                | PromptKind::QaSyntaxCorrect
        )
    }
}

impl fmt::Display for PromptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Renders the user message: instruction, then one section per required slot.
/// Returns the first missing slot on failure.
pub fn render_prompt(kind: PromptKind, slots: &Slots) -> Result<String, Slot> {
    let mut out = String::from(kind.instruction());
    for &slot in kind.required_slots() {
        let value = slots.get(&slot).ok_or(slot)?;
        out.push_str("\n\n");
        if slot == Slot::Table {
            out.push_str("Table:\n");
            out.push_str(value.trim_end());
        } else {
            out.push_str(slot.heading());
            out.push_str(": ");
            out.push_str(value);
        }
    }
    Ok(out)
}
