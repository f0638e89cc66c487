use serde::{Deserialize, Serialize};

use super::{Gateway, GatewayError, PromptKind, Slot, Slots};
use crate::expr::execute_verdict;
use crate::table::{render_for_prompt, RenderLimits, Table};

/// A false twin of a true statement, with the query that refuted it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Perturbation {
    pub statement: String,
    pub check_query: String,
}

/// Asks the model for a minimally edited, contradicted version of
/// `statement`, then accepts it only if a freshly generated query for the
/// new statement executes to False.
pub fn perturb_statement(
    gateway: &Gateway,
    statement: &str,
    table: &Table,
) -> Result<Perturbation, GatewayError> {
    let statement = statement.trim();
    if statement.is_empty() {
        return Err(GatewayError::Precondition("statement is empty".into()));
    }
    let table_text = render_for_prompt(table, RenderLimits::default());
    let mut slots = Slots::new();
    slots.insert(Slot::Table, table_text);
    slots.insert(Slot::Statement, statement.to_string());
    let edited = gateway.generate(PromptKind::Perturb, &slots)?;
    if edited.is_empty() || edited.to_lowercase() == statement.to_lowercase() {
        return Err(GatewayError::PerturbRejected(
            "statement was not changed".into(),
        ));
    }
    slots.insert(Slot::Statement, edited.clone());
    let check_query = gateway.generate(PromptKind::FactGenerate, &slots)?;
    match execute_verdict(&check_query, table) {
        Ok(false) => Ok(Perturbation {
            statement: edited,
            check_query,
        }),
        Ok(true) => Err(GatewayError::PerturbRejected(format!(
            "'{edited}' still verifies True"
        ))),
        Err(e) => Err(GatewayError::PerturbRejected(format!(
            "check query failed: {e}"
        ))),
    }
}
