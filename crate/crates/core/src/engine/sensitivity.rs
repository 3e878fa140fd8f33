use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use super::{EffectiveLevels, SanitizedMessage, Substitution};
use crate::annotate::{AnnotatedMessage, AnnotatedPhrase};
use crate::kb::{ConceptId, KnowledgeBase};
use crate::nlp::{self, EntityCategory, NamedEntity};
use crate::policy::{placeholder, AccessLevel, PolicyError, TopicScope};

/// Replacement for anything under a NULL level.
pub const WITHHELD: &str = "[withheld]";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum Action {
    Withhold,
    /// Replace by the label of an access-level node above the sense.
    Generalize { node: ConceptId, label: String },
    Placeholder { text: String },
}

impl Action {
    pub fn replacement(&self) -> &str {
        match self {
            Action::Withhold => WITHHELD,
            Action::Generalize { label, .. } => label,
            Action::Placeholder { text } => text,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "index", rename_all = "kebab-case")]
pub enum Target {
    Phrase(usize),
    Entity(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SensitiveTerm {
    pub target: Target,
    pub span: (usize, usize),
    pub surface: String,
    pub topic: String,
    /// The governing access level, as written in the rule.
    pub level: String,
    #[serde(flatten)]
    pub action: Action,
}

/// Work done by one assessment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AssessStats {
    /// Distinct chosen senses in the message.
    pub senses: usize,
    /// Total size of the access-level branches consulted.
    pub branch_size: usize,
    /// Sense-against-branch membership tests.
    pub membership_checks: usize,
    pub branch_queries: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Assessment {
    /// Sorted by span.
    pub terms: Vec<SensitiveTerm>,
    pub stats: AssessStats,
    /// Topic roots that are not in the taxonomy.
    pub warnings: Vec<String>,
}

/// A decision for one sense, with what is needed to rank it against
/// decisions from other topics.
#[derive(Debug, Clone)]
struct Decision {
    action: Action,
    /// Upward distance from the sense to the replacement node.
    depth: usize,
    topic: String,
    level: String,
}

impl Decision {
    /// Withholding beats generalizing; between generalizations the more
    /// general node (farther up) wins, then the smaller node id.
    fn stricter_than(&self, other: &Decision) -> bool {
        match (&self.action, &other.action) {
            (Action::Withhold, Action::Withhold) => false,
            (Action::Withhold, _) => true,
            (_, Action::Withhold) => false,
            (Action::Generalize { node: a, .. }, Action::Generalize { node: b, .. }) => {
                self.depth > other.depth || (self.depth == other.depth && a < b)
            }
            _ => false,
        }
    }
}

fn keep_stricter(slot: &mut Option<Decision>, d: Decision) {
    match slot {
        Some(prev) if !d.stricter_than(prev) => {}
        _ => *slot = Some(d),
    }
}

/// The closest node of `targets` above `sense`, breadth first over parent
/// edges; equally close nodes are settled by id.
fn nearest_above<K: KnowledgeBase + ?Sized>(
    kb: &K,
    sense: &ConceptId,
    targets: &BTreeSet<ConceptId>,
) -> Result<Option<(ConceptId, usize)>, PolicyError> {
    let mut seen: BTreeSet<ConceptId> = BTreeSet::from([sense.clone()]);
    let mut frontier: VecDeque<ConceptId> = VecDeque::from([sense.clone()]);
    let mut depth = 0;
    while !frontier.is_empty() {
        depth += 1;
        let mut next = BTreeSet::new();
        for c in frontier.drain(..) {
            for p in kb.parents(&c)? {
                if seen.insert(p.clone()) {
                    next.insert(p);
                }
            }
        }
        if let Some(hit) = next.iter().find(|c| targets.contains(*c)) {
            return Ok(Some((hit.clone(), depth)));
        }
        frontier.extend(next);
    }
    Ok(None)
}

/// Finds the phrase and entity occurrences a reader under `levels` may not
/// see, and what each becomes.
///
/// A phrase is sensitive when its chosen sense lies strictly below a node
/// of a concept level; a sense equal to any level node is disclosed. Under a
/// NULL level every sense inside the topic (its root included) is withheld.
/// Entities follow their category's level.
pub fn assess_sensitivity<K: KnowledgeBase + ?Sized>(
    annotated: &AnnotatedMessage,
    levels: &EffectiveLevels,
    kb: &K,
) -> Result<Assessment, PolicyError> {
    let mut senses: Vec<&ConceptId> = annotated.phrases.iter().filter_map(|p| p.chosen.as_ref()).collect();
    senses.sort();
    senses.dedup();

    let mut out = Assessment::default();
    out.stats.senses = senses.len();
    let mut by_sense: BTreeMap<&ConceptId, Option<Decision>> = senses.iter().map(|s| (*s, None)).collect();
    let mut by_category: BTreeMap<EntityCategory, Option<Decision>> = BTreeMap::new();

    for (topic, level) in levels.iter() {
        let level_text = level.to_string();
        let decision = |action, depth| Decision {
            action,
            depth,
            topic: topic.name.clone(),
            level: level_text.clone(),
        };
        match (&topic.scope, level) {
            (TopicScope::Entity(category), AccessLevel::Null) => {
                keep_stricter(by_category.entry(*category).or_default(), decision(Action::Withhold, 0));
            }
            (TopicScope::Entity(category), AccessLevel::NeCategory { category: c }) if c == category => {
                let text = placeholder(*category).to_owned();
                keep_stricter(by_category.entry(*category).or_default(), decision(Action::Placeholder { text }, 0));
            }
            (TopicScope::Entity(category), AccessLevel::NeName { category: c }) if c == category => {}
            (TopicScope::Entity(_), _) | (_, AccessLevel::NeCategory { .. } | AccessLevel::NeName { .. }) => {
                return Err(PolicyError::InvalidEntityLevel {
                    topic: topic.name.clone(),
                    label: level_text,
                });
            }
            (TopicScope::AllConcepts, AccessLevel::Null) => {
                for s in &senses {
                    out.stats.membership_checks += 1;
                    keep_stricter(by_sense.get_mut(*s).expect("listed"), decision(Action::Withhold, 0));
                }
            }
            (TopicScope::Concepts(roots), AccessLevel::Null) => {
                let mut scope = BTreeSet::new();
                for label in roots {
                    let nodes = kb.concepts_labelled(label)?;
                    if nodes.is_empty() {
                        out.warnings
                            .push(format!("topic `{}`: root `{label}` is not in the taxonomy", topic.name));
                    }
                    for n in nodes {
                        let branch = kb.branch(&n)?;
                        out.stats.branch_queries += 1;
                        out.stats.branch_size += branch.len() + 1;
                        scope.extend(branch);
                        scope.insert(n);
                    }
                }
                if scope.is_empty() {
                    continue;
                }
                for s in &senses {
                    out.stats.membership_checks += 1;
                    if scope.contains(*s) {
                        keep_stricter(by_sense.get_mut(*s).expect("listed"), decision(Action::Withhold, 0));
                    }
                }
            }
            (_, AccessLevel::Concept { nodes, .. }) => {
                let mut containing: BTreeMap<&ConceptId, BTreeSet<ConceptId>> = BTreeMap::new();
                for node in nodes {
                    let branch = kb.branch(node)?;
                    out.stats.branch_queries += 1;
                    out.stats.branch_size += branch.len();
                    if branch.is_empty() {
                        continue;
                    }
                    for s in &senses {
                        out.stats.membership_checks += 1;
                        if branch.contains(*s) && !nodes.contains(*s) {
                            containing.entry(*s).or_default().insert(node.clone());
                        }
                    }
                }
                for (s, above) in containing {
                    let (node, depth) = nearest_above(kb, s, &above)?.expect("a branch member has the root above it");
                    let label = kb.label(&node)?;
                    keep_stricter(
                        by_sense.get_mut(s).expect("listed"),
                        decision(Action::Generalize { node, label }, depth),
                    );
                }
            }
        }
    }

    let term = |target, span, surface: &str, d: &Decision| SensitiveTerm {
        target,
        span,
        surface: surface.to_owned(),
        topic: d.topic.clone(),
        level: d.level.clone(),
        action: d.action.clone(),
    };
    for (i, p) in annotated.phrases.iter().enumerate() {
        if let Some(Some(d)) = p.chosen.as_ref().and_then(|c| by_sense.get(c)) {
            out.terms.push(term(Target::Phrase(i), p.span, &p.surface, d));
        }
    }
    for (i, e) in annotated.entities.iter().enumerate() {
        if let Some(Some(d)) = by_category.get(&e.category) {
            out.terms.push(term(Target::Entity(i), e.span, &e.surface, d));
        }
    }
    out.terms.sort_by_key(|t| t.span);
    Ok(out)
}

/// Rewrites the message for a reader under `levels`. Text outside the
/// sensitive spans is copied unchanged.
pub fn sanitize<K: KnowledgeBase + ?Sized>(
    annotated: &AnnotatedMessage,
    levels: &EffectiveLevels,
    kb: &K,
) -> Result<SanitizedMessage, PolicyError> {
    let assessment = assess_sensitivity(annotated, levels, kb)?;
    Ok(apply(annotated, levels, &assessment))
}

pub(crate) fn apply(annotated: &AnnotatedMessage, levels: &EffectiveLevels, assessment: &Assessment) -> SanitizedMessage {
    let substitutions: Vec<Substitution> = assessment
        .terms
        .iter()
        .map(|t| Substitution {
            span: t.span,
            surface: t.surface.clone(),
            replacement: t.action.replacement().to_owned(),
            topic: t.topic.clone(),
            level: t.level.clone(),
        })
        .collect();
    SanitizedMessage {
        message_id: annotated.message_id.clone(),
        text: super::splice(&annotated.text, &substitutions),
        substitutions,
        cache_key: (annotated.message_id.clone(), levels.fingerprint()),
    }
}

/// The annotation the sanitized text would carry: generalized phrases take
/// their replacement node as sense, withheld phrases and replaced entities
/// disappear, everything else keeps its sense at its shifted position.
pub fn reannotate<K: KnowledgeBase + ?Sized>(
    annotated: &AnnotatedMessage,
    levels: &EffectiveLevels,
    kb: &K,
) -> Result<AnnotatedMessage, PolicyError> {
    let assessment = assess_sensitivity(annotated, levels, kb)?;
    let sanitized = apply(annotated, levels, &assessment);

    // Character offset shift at each original position.
    let shift_at = |pos: usize| -> isize {
        assessment
            .terms
            .iter()
            .take_while(|t| t.span.1 <= pos)
            .map(|t| t.action.replacement().chars().count() as isize - (t.span.1 - t.span.0) as isize)
            .sum()
    };
    let moved = |span: (usize, usize)| {
        let d = shift_at(span.0);
        ((span.0 as isize + d) as usize, (span.1 as isize + d) as usize)
    };
    let action_for = |target: Target| assessment.terms.iter().find(|t| t.target == target).map(|t| &t.action);

    let mut phrases = Vec::new();
    for (i, p) in annotated.phrases.iter().enumerate() {
        match action_for(Target::Phrase(i)) {
            None => phrases.push(AnnotatedPhrase {
                tokens: (0, 0),
                span: moved(p.span),
                ..p.clone()
            }),
            Some(Action::Generalize { node, label }) => {
                let span = moved(p.span);
                let head = label.to_lowercase();
                phrases.push(AnnotatedPhrase {
                    tokens: (0, 0),
                    span: (span.0, span.0 + label.chars().count()),
                    surface: label.clone(),
                    key: head.clone(),
                    head,
                    candidates: vec![node.clone()],
                    chosen: Some(node.clone()),
                });
            }
            Some(_) => {}
        }
    }
    let entities: Vec<NamedEntity> = annotated
        .entities
        .iter()
        .enumerate()
        .filter(|(i, _)| action_for(Target::Entity(*i)).is_none())
        .map(|(_, e)| NamedEntity {
            tokens: (0, 0),
            span: moved(e.span),
            ..e.clone()
        })
        .collect();

    let tokens = nlp::tokenize(&sanitized.text);
    let token_range = |span: (usize, usize)| {
        let first = tokens.iter().position(|t| t.span.0 >= span.0).unwrap_or(tokens.len());
        let last = tokens.iter().rposition(|t| t.span.1 <= span.1).map_or(first, |i| i + 1);
        (first, last.max(first))
    };
    let phrases = phrases
        .into_iter()
        .map(|p| AnnotatedPhrase {
            tokens: token_range(p.span),
            ..p
        })
        .collect();
    let entities = entities
        .into_iter()
        .map(|e| NamedEntity {
            tokens: token_range(e.span),
            ..e
        })
        .collect();
    Ok(AnnotatedMessage {
        message_id: annotated.message_id.clone(),
        publisher: annotated.publisher.clone(),
        co_publishers: annotated.co_publishers.clone(),
        text: sanitized.text,
        tokens,
        entities,
        phrases,
    })
}
