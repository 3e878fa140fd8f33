use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{resolve_label, AccessLevel, PolicyError, RuleSet, TopicCatalog, TopicScope};
use crate::kb::{ConceptId, KnowledgeBase};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum LevelStatus {
    Null,
    Entity { level: AccessLevel },
    Resolved { nodes: BTreeSet<ConceptId> },
    /// The label names several nodes; all of them form the level.
    Ambiguous { nodes: BTreeSet<ConceptId> },
    Unresolvable { missing: Vec<String> },
    UnknownTopic,
    InvalidEntityLevel,
}

impl LevelStatus {
    pub fn is_failure(&self) -> bool {
        matches!(
            self,
            LevelStatus::Unresolvable { .. } | LevelStatus::UnknownTopic | LevelStatus::InvalidEntityLevel
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationEntry {
    pub st: String,
    pub cc: String,
    pub al: Option<String>,
    #[serde(flatten)]
    pub status: LevelStatus,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub publisher: String,
    pub entries: Vec<ValidationEntry>,
    /// Topic roots missing from the taxonomy. NULL rules for such a topic
    /// withhold nothing.
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        !self.entries.iter().any(|e| e.status.is_failure())
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidationEntry> {
        self.entries.iter().filter(|e| e.status.is_failure())
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |nodes: &BTreeSet<ConceptId>| nodes.iter().map(ConceptId::as_str).collect::<Vec<_>>().join(", ");
        for e in &self.entries {
            let al = e.al.as_deref().unwrap_or("null");
            let status = match &e.status {
                LevelStatus::Null => "ok (null)".to_owned(),
                LevelStatus::Entity { level } => format!("ok (entity level {})", level.fingerprint()),
                LevelStatus::Resolved { nodes } => format!("ok -> {{{}}}", join(nodes)),
                LevelStatus::Ambiguous { nodes } => format!("ambiguous -> {{{}}}", join(nodes)),
                LevelStatus::Unresolvable { missing } => format!("UNRESOLVABLE: {}", missing.join(", ")),
                LevelStatus::UnknownTopic => "UNKNOWN TOPIC".to_owned(),
                LevelStatus::InvalidEntityLevel => "INVALID ENTITY LEVEL".to_owned(),
            };
            writeln!(f, "{}\t{}\t{}\t{}", e.st, e.cc, al, status)?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// Checks every rule's level against the taxonomy. Problems are reported,
/// not raised; only knowledge-base failures are errors.
pub fn validate_rules<K: KnowledgeBase + ?Sized>(
    rules: &RuleSet,
    kb: &K,
    catalog: &TopicCatalog,
) -> Result<ValidationReport, PolicyError> {
    let mut report = ValidationReport {
        publisher: rules.publisher.clone(),
        ..Default::default()
    };
    let mut checked_topics: Vec<&str> = Vec::new();
    for rule in &rules.rules {
        let topic = catalog.get(&rule.st);
        let status = match (topic, &rule.al) {
            (None, _) => LevelStatus::UnknownTopic,
            (Some(_), None) => LevelStatus::Null,
            (Some(t), Some(label)) => match &t.scope {
                TopicScope::Entity(category) => match AccessLevel::entity_level(*category, label) {
                    Some(level) => LevelStatus::Entity { level },
                    None => LevelStatus::InvalidEntityLevel,
                },
                _ => {
                    let res = resolve_label(label, kb)?;
                    if !res.is_resolved() {
                        LevelStatus::Unresolvable { missing: res.missing }
                    } else if res.ambiguous {
                        LevelStatus::Ambiguous { nodes: res.nodes }
                    } else {
                        LevelStatus::Resolved { nodes: res.nodes }
                    }
                }
            },
        };
        if let Some(t) = topic {
            if !checked_topics.contains(&t.name.as_str()) {
                checked_topics.push(&t.name);
                if let TopicScope::Concepts(roots) = &t.scope {
                    for root in roots {
                        if kb.concepts_labelled(root)?.is_empty() {
                            report
                                .warnings
                                .push(format!("topic `{}`: root `{root}` is not in the taxonomy", t.name));
                        }
                    }
                }
            }
        }
        report.entries.push(ValidationEntry {
            st: rule.st.clone(),
            cc: rule.cc.clone(),
            al: rule.al.clone(),
            status,
        });
    }
    Ok(report)
}
