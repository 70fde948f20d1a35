//! Named pass/fail records attached to construction outputs.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ledger(pub Vec<Check>);

impl Ledger {
    pub fn new() -> Self {
        Ledger(Vec::new())
    }

    pub fn record(&mut self, id: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.0.push(Check {
            id: id.into(),
            pass,
            detail: detail.into(),
        });
    }

    /// Folds many evaluations of one condition into a single entry that
    /// keeps the first failure.
    pub fn record_all<I>(&mut self, id: impl Into<String>, results: I)
    where
        I: IntoIterator<Item = (bool, String)>,
    {
        let mut count = 0;
        let mut failure = None;
        for (ok, detail) in results {
            count += 1;
            if !ok && failure.is_none() {
                failure = Some(detail);
            }
        }
        match failure {
            Some(d) => self.record(id, false, d),
            None => self.record(id, true, format!("{} instances", count)),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.0.iter().all(|c| c.pass)
    }

    pub fn get(&self, id: &str) -> Option<&Check> {
        self.0.iter().find(|c| c.id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.0.iter().filter(|c| !c.pass)
    }
}
