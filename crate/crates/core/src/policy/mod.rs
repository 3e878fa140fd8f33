//! Privacy rules: who may see how much of which topic.
//!
//! A publisher states, per sensitive topic and contact category, the most
//! specific thing readers of that category may learn (an access level).
//! Anything not stated is denied: [`RuleSet::rule_for`] answers with a NULL
//! level for every topic the publisher said nothing about.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::KbError;
use crate::nlp::EntityCategory;

mod contacts;
mod level;
mod requirements;
mod validate;

pub use contacts::ContactGraph;
pub use level::{placeholder, resolve_conflict, resolve_label, AccessLevel, LabelResolution};
pub use requirements::{compile_requirements, Requirements, TopicRequirement};
pub use validate::{validate_rules, LevelStatus, ValidationEntry, ValidationReport};

/// Built-in category for readers with no contact edge to the owner.
pub const STRANGERS: &str = "strangers";

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("unknown sensitive topic `{0}`")]
    UnknownTopic(String),
    #[error("contact category `{category}` is not declared by `{publisher}`")]
    UnknownCategory { publisher: String, category: String },
    #[error("duplicate rule for topic `{st}` and category `{cc}`")]
    DuplicateRule { st: String, cc: String },
    #[error("malformed requirements: {0}")]
    Parse(String),
    #[error("access level `{label}` does not name any taxonomy node")]
    UnresolvedLevel { label: String },
    #[error("access level `{label}` is not valid for entity topic `{topic}`")]
    InvalidEntityLevel { topic: String, label: String },
    #[error("conflict resolution needs at least one access level")]
    EmptyConflict,
    #[error("incompatible access levels: {0}")]
    IncompatibleLevels(String),
    #[error("contacts line {line}: {message}")]
    Contacts { line: usize, message: String },
    #[error(transparent)]
    Kb(#[from] KbError),
}

/// What a topic covers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopicScope {
    /// Concepts at or below taxonomy nodes with these labels.
    Concepts(Vec<String>),
    /// Every annotated concept.
    AllConcepts,
    /// Named entities of one category.
    Entity(EntityCategory),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub name: String,
    pub scope: TopicScope,
}

impl Topic {
    pub fn concepts(name: &str, roots: &[&str]) -> Self {
        Self {
            name: name.to_owned(),
            scope: TopicScope::Concepts(roots.iter().map(|r| (*r).to_owned()).collect()),
        }
    }

    pub fn entity(category: EntityCategory) -> Self {
        Self {
            name: format!("NE_{}", category.name().to_lowercase()),
            scope: TopicScope::Entity(category),
        }
    }

    pub fn is_entity(&self) -> bool {
        matches!(self.scope, TopicScope::Entity(_))
    }
}

/// The system-provided list of sensitive topics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicCatalog {
    pub topics: Vec<Topic>,
}

impl Default for TopicCatalog {
    fn default() -> Self {
        let mut topics = vec![
            Topic::concepts("medical health", &["medicine"]),
            Topic::concepts("religion", &["religion"]),
            Topic::concepts("race", &["race"]),
            Topic::concepts("politics", &["politics"]),
            Topic::concepts("sexuality", &["sexuality"]),
        ];
        topics.extend(EntityCategory::ALL.into_iter().map(Topic::entity));
        Self { topics }
    }
}

impl TopicCatalog {
    pub fn new(topics: Vec<Topic>) -> Self {
        Self { topics }
    }

    /// Case-insensitive lookup by topic name.
    pub fn get(&self, name: &str) -> Option<&Topic> {
        let name = name.trim();
        self.topics.iter().find(|t| t.name.eq_ignore_ascii_case(name))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Topic> {
        self.topics.iter()
    }
}

/// `⟨st, cc, al⟩`. A `None` access level is NULL: nothing about the topic
/// may be disclosed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrivacyRule {
    pub st: String,
    pub cc: String,
    pub al: Option<String>,
}

impl fmt::Display for PrivacyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.al {
            Some(al) => write!(f, "<{}, {}, '{}'>", self.st, self.cc, al),
            None => write!(f, "<{}, {}, null>", self.st, self.cc),
        }
    }
}

/// All rules of one publisher.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSet {
    pub publisher: String,
    pub categories: Vec<String>,
    pub rules: Vec<PrivacyRule>,
}

impl RuleSet {
    pub fn has_category(&self, category: &str) -> bool {
        category == STRANGERS || self.categories.iter().any(|c| c == category)
    }

    /// One rule per catalog topic for readers of `category`; topics without a
    /// stated rule get NULL.
    pub fn rule_for(&self, category: &str, catalog: &TopicCatalog) -> Result<Vec<PrivacyRule>, PolicyError> {
        if !self.has_category(category) {
            return Err(PolicyError::UnknownCategory {
                publisher: self.publisher.clone(),
                category: category.to_owned(),
            });
        }
        Ok(catalog
            .iter()
            .map(|topic| {
                self.rules
                    .iter()
                    .find(|r| r.cc == category && r.st.eq_ignore_ascii_case(&topic.name))
                    .cloned()
                    .unwrap_or_else(|| PrivacyRule {
                        st: topic.name.clone(),
                        cc: category.to_owned(),
                        al: None,
                    })
            })
            .collect())
    }

    /// NULL for every topic, the answer for a publisher without rules.
    pub fn deny_all(category: &str, catalog: &TopicCatalog) -> Vec<PrivacyRule> {
        catalog
            .iter()
            .map(|t| PrivacyRule {
                st: t.name.clone(),
                cc: category.to_owned(),
                al: None,
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule sets always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, PolicyError> {
        serde_json::from_str(text).map_err(|e| PolicyError::Parse(e.to_string()))
    }
}
