use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{PolicyError, Topic, TopicScope};
use crate::kb::{ConceptId, KnowledgeBase};
use crate::nlp::EntityCategory;

/// The most a reader may learn about one topic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AccessLevel {
    /// Nothing at all.
    Null,
    /// Anything strictly below one of `nodes` is generalized to it.
    Concept { label: String, nodes: BTreeSet<ConceptId> },
    /// Entities of this category are replaced by a placeholder.
    NeCategory { category: EntityCategory },
    /// Entity names may be shown.
    NeName { category: EntityCategory },
}

impl AccessLevel {
    /// Resolves a rule's level label for `topic`. `None` is NULL.
    pub fn resolve<K: KnowledgeBase + ?Sized>(
        topic: &Topic,
        label: Option<&str>,
        kb: &K,
    ) -> Result<AccessLevel, PolicyError> {
        let Some(label) = label else {
            return Ok(AccessLevel::Null);
        };
        match &topic.scope {
            TopicScope::Entity(category) => Self::entity_level(*category, label).ok_or_else(|| {
                PolicyError::InvalidEntityLevel {
                    topic: topic.name.clone(),
                    label: label.to_owned(),
                }
            }),
            TopicScope::Concepts(_) | TopicScope::AllConcepts => {
                let res = resolve_label(label, kb)?;
                if !res.is_resolved() {
                    return Err(PolicyError::UnresolvedLevel { label: label.to_owned() });
                }
                Ok(AccessLevel::Concept {
                    label: label.to_owned(),
                    nodes: res.nodes,
                })
            }
        }
    }

    /// `person_name` / `person name` allow names; `person` / `a person`
    /// allow only the category.
    pub fn entity_level(category: EntityCategory, label: &str) -> Option<AccessLevel> {
        let norm = label.trim().to_lowercase().replace(['_', '-'], " ");
        let norm = norm.split_whitespace().collect::<Vec<_>>().join(" ");
        let cat = category.name().to_lowercase();
        let stripped = norm
            .strip_prefix("an ")
            .or_else(|| norm.strip_prefix("a "))
            .unwrap_or(&norm);
        if stripped == format!("{cat} name") {
            Some(AccessLevel::NeName { category })
        } else if stripped == cat || stripped == format!("{cat} category") || norm == placeholder(category) {
            Some(AccessLevel::NeCategory { category })
        } else {
            None
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, AccessLevel::Null)
    }

    pub fn nodes(&self) -> Option<&BTreeSet<ConceptId>> {
        match self {
            AccessLevel::Concept { nodes, .. } => Some(nodes),
            _ => None,
        }
    }

    /// Canonical text form used in cache keys. Two levels with the same
    /// fingerprint sanitize identically.
    pub fn fingerprint(&self) -> String {
        match self {
            AccessLevel::Null => "null".to_owned(),
            AccessLevel::Concept { nodes, .. } => {
                let ids: Vec<&str> = nodes.iter().map(ConceptId::as_str).collect();
                format!("concept:{}", ids.join(","))
            }
            AccessLevel::NeCategory { category } => format!("ne-category:{category}"),
            AccessLevel::NeName { category } => format!("ne-name:{category}"),
        }
    }

    fn same_level(&self, other: &AccessLevel) -> bool {
        match (self, other) {
            (AccessLevel::Concept { nodes: a, .. }, AccessLevel::Concept { nodes: b, .. }) => a == b,
            _ => self == other,
        }
    }
}

impl fmt::Display for AccessLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AccessLevel::Null => f.write_str("null"),
            AccessLevel::Concept { label, .. } => f.write_str(label),
            AccessLevel::NeCategory { category } => write!(f, "{}", category.name().to_lowercase()),
            AccessLevel::NeName { category } => write!(f, "{}_name", category.name().to_lowercase()),
        }
    }
}

/// Replacement text for an entity under a category-only level.
pub fn placeholder(category: EntityCategory) -> &'static str {
    match category {
        EntityCategory::Person => "a person",
        EntityCategory::Location => "a location",
        EntityCategory::Organization => "an organization",
        EntityCategory::Date => "a date",
        EntityCategory::Time => "a time",
        EntityCategory::Money => "an amount",
        EntityCategory::Percent => "a percentage",
    }
}

/// Outcome of matching an access-level label against the taxonomy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelResolution {
    pub label: String,
    pub nodes: BTreeSet<ConceptId>,
    /// Some label (or `/`-separated part) matched more than one node.
    pub ambiguous: bool,
    /// Parts that matched nothing.
    pub missing: Vec<String>,
}

impl LabelResolution {
    pub fn is_resolved(&self) -> bool {
        self.missing.is_empty() && !self.nodes.is_empty()
    }
}

/// Matches a label case-insensitively against concept labels and aliases.
/// A label with no whole match that contains `/` is read as a list of
/// labels (`HIV/AIDS/Hepatitis/STDs`).
pub fn resolve_label<K: KnowledgeBase + ?Sized>(label: &str, kb: &K) -> Result<LabelResolution, PolicyError> {
    let mut res = LabelResolution {
        label: label.to_owned(),
        nodes: BTreeSet::new(),
        ambiguous: false,
        missing: Vec::new(),
    };
    let whole = kb.concepts_labelled(label)?;
    if !whole.is_empty() {
        res.ambiguous = whole.len() > 1;
        res.nodes.extend(whole);
        return Ok(res);
    }
    if !label.contains('/') {
        res.missing.push(label.trim().to_owned());
        return Ok(res);
    }
    for part in label.split('/').map(str::trim).filter(|p| !p.is_empty()) {
        let found = kb.concepts_labelled(part)?;
        if found.is_empty() {
            res.missing.push(part.to_owned());
        }
        res.ambiguous |= found.len() > 1;
        res.nodes.extend(found);
    }
    Ok(res)
}

/// The strictest level satisfying every input.
///
/// NULL wins outright. Identical levels resolve to themselves. Otherwise
/// concept levels merge into the most general nodes of their union (a node
/// below another node of the union is dropped), and entity levels take the
/// stricter of category and name. Concept and entity levels cannot be mixed,
/// and entity levels of different categories have no defined order.
pub fn resolve_conflict<K: KnowledgeBase + ?Sized>(levels: &[AccessLevel], kb: &K) -> Result<AccessLevel, PolicyError> {
    let first = levels.first().ok_or(PolicyError::EmptyConflict)?;
    if levels.iter().any(AccessLevel::is_null) {
        return Ok(AccessLevel::Null);
    }
    if levels.iter().all(|l| l.same_level(first)) {
        return Ok(match first {
            AccessLevel::Concept { nodes, .. } => AccessLevel::Concept {
                label: levels
                    .iter()
                    .filter_map(|l| match l {
                        AccessLevel::Concept { label, .. } => Some(label.as_str()),
                        _ => None,
                    })
                    .min()
                    .unwrap_or_default()
                    .to_owned(),
                nodes: nodes.clone(),
            },
            other => other.clone(),
        });
    }
    if levels.iter().all(|l| matches!(l, AccessLevel::Concept { .. })) {
        let union: BTreeSet<ConceptId> = levels.iter().flat_map(|l| l.nodes().into_iter().flatten()).cloned().collect();
        let mut kept = BTreeSet::new();
        for n in &union {
            let above = kb.ancestors(n, true)?;
            if !union.iter().any(|m| above.contains(m)) {
                kept.insert(n.clone());
            }
        }
        let labels: Result<Vec<String>, _> = kept.iter().map(|n| kb.label(n)).collect();
        return Ok(AccessLevel::Concept {
            label: labels?.join("/"),
            nodes: kept,
        });
    }
    let mut category = None;
    let mut names_only = true;
    for l in levels {
        let (c, is_name) = match l {
            AccessLevel::NeCategory { category } => (*category, false),
            AccessLevel::NeName { category } => (*category, true),
            _ => {
                return Err(PolicyError::IncompatibleLevels(
                    "concept and entity access levels cannot be combined".into(),
                ))
            }
        };
        if category.is_some_and(|prev| prev != c) {
            return Err(PolicyError::IncompatibleLevels(format!(
                "entity levels of different categories ({} and {c})",
                category.expect("checked above")
            )));
        }
        category = Some(c);
        names_only &= is_name;
    }
    let category = category.expect("levels is non-empty");
    Ok(if names_only {
        AccessLevel::NeName { category }
    } else {
        AccessLevel::NeCategory { category }
    })
}
