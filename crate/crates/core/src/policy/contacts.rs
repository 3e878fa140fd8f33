use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{PolicyError, STRANGERS};

/// Owner → contact → contact category.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactGraph {
    edges: BTreeMap<String, BTreeMap<String, String>>,
}

impl ContactGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `owner<TAB>contact<TAB>category` lines; `#` lines are comments.
    pub fn from_tsv(text: &str) -> Result<Self, PolicyError> {
        let mut g = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            let [owner, contact, category] = fields[..] else {
                return Err(PolicyError::Contacts {
                    line: n + 1,
                    message: "expected owner<TAB>contact<TAB>category".into(),
                });
            };
            if owner.is_empty() || contact.is_empty() || category.is_empty() {
                return Err(PolicyError::Contacts {
                    line: n + 1,
                    message: "empty field".into(),
                });
            }
            g.insert(owner, contact, category).map_err(|e| match e {
                PolicyError::Contacts { message, .. } => PolicyError::Contacts { line: n + 1, message },
                other => other,
            })?;
        }
        Ok(g)
    }

    /// Adds an edge. A contact already filed under another category is an
    /// error: each contact has exactly one category per owner.
    pub fn insert(&mut self, owner: &str, contact: &str, category: &str) -> Result<(), PolicyError> {
        let slot = self.edges.entry(owner.to_owned()).or_default();
        match slot.get(contact) {
            Some(existing) if existing != category => Err(PolicyError::Contacts {
                line: 0,
                message: format!("`{contact}` is both `{existing}` and `{category}` for `{owner}`"),
            }),
            _ => {
                slot.insert(contact.to_owned(), category.to_owned());
                Ok(())
            }
        }
    }

    /// The contact's category, or `strangers` without an edge.
    pub fn category(&self, owner: &str, contact: &str) -> &str {
        self.edges
            .get(owner)
            .and_then(|m| m.get(contact))
            .map(String::as_str)
            .unwrap_or(STRANGERS)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (owner, contacts) in &self.edges {
            for (contact, category) in contacts {
                out.push_str(&format!("{owner}\t{contact}\t{category}\n"));
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.edges.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
