//! Taxonomy knowledge base.
//!
//! The offline [`TaxonomyStore`] is loaded from a line-oriented snapshot file
//! (see [`snapshot`]) and is the reference implementation of
//! [`KnowledgeBase`]. With the `remote` feature, [`remote::SparqlKb`] answers
//! the same queries against a SPARQL endpoint.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod snapshot;
mod store;

#[cfg(feature = "remote")]
pub mod remote;

pub use store::{QueryStats, TaxonomyStore};

/// Identifier of a taxonomy node (a category).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptId(pub String);

impl ConceptId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ConceptId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

/// Identifier of a resource (an article-like entry with a title).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResourceId(pub String);

impl ResourceId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ResourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A taxonomy node. The first label is the display label; the remaining ones
/// are aliases accepted when resolving access-level terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    pub id: ConceptId,
    pub label: String,
    pub aliases: Vec<String>,
    pub parents: Vec<ConceptId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resource {
    pub id: ResourceId,
    pub title: String,
    pub concept: ConceptId,
    /// `(property name, target resource)` in snapshot order.
    pub properties: Vec<(String, ResourceId)>,
    pub categories: Vec<ConceptId>,
}

#[derive(Debug, Error)]
pub enum KbError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: dangling reference: {message}")]
    Integrity { line: usize, message: String },
    #[error("parent graph has a cycle through concept `{concept}`")]
    Cycle { concept: ConceptId },
    #[error("unknown concept `{0}`")]
    UnknownConcept(ConceptId),
    #[error("unknown resource `{0}`")]
    UnknownResource(ResourceId),
    #[error("cannot read snapshot {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("remote endpoint: {0}")]
    Remote(String),
}

/// Lowercases, maps `_` to a space and collapses runs of whitespace.
///
/// Titles and noun phrases are both compared in this form.
pub fn normalize_title(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s
        .split(|c: char| c == '_' || c.is_whitespace())
        .filter(|w| !w.is_empty())
    {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

/// Query surface shared by the offline store and the remote client.
///
/// All set-valued results are ordered by concept id so that callers see the
/// same results regardless of backend.
pub trait KnowledgeBase {
    /// Concepts reachable through parent edges. The concept itself is
    /// included unless `strict` is set.
    fn ancestors(&self, concept: &ConceptId, strict: bool) -> Result<BTreeSet<ConceptId>, KbError>;

    /// Strict descendants of `root`.
    fn branch(&self, root: &ConceptId) -> Result<BTreeSet<ConceptId>, KbError>;

    /// Direct parents of a concept.
    fn parents(&self, concept: &ConceptId) -> Result<Vec<ConceptId>, KbError>;

    /// Resources whose normalized title contains the normalized phrase.
    /// Counts as exactly one query.
    fn lookup_resources(&self, phrase: &str) -> Result<Vec<Resource>, KbError>;

    /// Input resources followed by their property-link targets, deduplicated.
    fn expand_related(&self, resources: &[Resource]) -> Result<Vec<Resource>, KbError>;

    /// Union of the resources' categories, deduplicated, first-seen order.
    fn categories_of(&self, resources: &[Resource]) -> Result<Vec<ConceptId>, KbError>;

    fn label(&self, concept: &ConceptId) -> Result<String, KbError>;

    /// Concepts whose label or alias equals `label`, ignoring case.
    fn concepts_labelled(&self, label: &str) -> Result<Vec<ConceptId>, KbError>;

    fn contains(&self, concept: &ConceptId) -> bool;

    fn stats(&self) -> QueryStats;

    /// The three-step sense retrieval for one noun phrase: title match,
    /// related-resource expansion, category collection.
    fn candidate_senses(&self, phrase: &str) -> Result<Vec<ConceptId>, KbError> {
        let found = self.lookup_resources(phrase)?;
        if found.is_empty() {
            return Ok(Vec::new());
        }
        let expanded = self.expand_related(&found)?;
        self.categories_of(&expanded)
    }
}
