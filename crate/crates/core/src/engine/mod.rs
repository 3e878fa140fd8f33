//! The access monitor.
//!
//! For each request the monitor works out the reader's contact category
//! with the publisher and every co-publisher, gathers each party's access
//! level per topic, keeps the strictest, and serves the message sanitized
//! under the result. Sanitized versions are cached per message and
//! effective-level fingerprint, so readers in different categories that end
//! up with the same levels share one copy.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::annotate::AnnotatedMessage;
use crate::kb::KnowledgeBase;
use crate::policy::{resolve_conflict, AccessLevel, ContactGraph, PolicyError, RuleSet, Topic, TopicCatalog, TopicScope};
use crate::store::{ContentStore, StoreError};
use crate::{Error, Result};

mod sensitivity;

pub use sensitivity::{
    assess_sensitivity, reannotate, sanitize, Action, AssessStats, Assessment, SensitiveTerm, Target, WITHHELD,
};

/// One topic's access level for a reader. Topics absent from the list are
/// unrestricted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EffectiveLevels {
    entries: Vec<(Topic, AccessLevel)>,
}

impl EffectiveLevels {
    pub fn new() -> Self {
        Self::default()
    }

    /// A single level applied to every concept (or, for entity levels, to
    /// entities of its category).
    pub fn single(level: AccessLevel) -> Self {
        let topic = match &level {
            AccessLevel::NeCategory { category } | AccessLevel::NeName { category } => Topic::entity(*category),
            _ => Topic {
                name: "all".into(),
                scope: TopicScope::AllConcepts,
            },
        };
        Self {
            entries: vec![(topic, level)],
        }
    }

    /// Sets the level of `topic`, replacing an earlier one.
    pub fn set(&mut self, topic: Topic, level: AccessLevel) {
        match self.entries.iter_mut().find(|(t, _)| t.name == topic.name) {
            Some(slot) => slot.1 = level,
            None => self.entries.push((topic, level)),
        }
    }

    pub fn with(mut self, topic: Topic, level: AccessLevel) -> Self {
        self.set(topic, level);
        self
    }

    pub fn get(&self, topic: &str) -> Option<&AccessLevel> {
        self.entries.iter().find(|(t, _)| t.name.eq_ignore_ascii_case(topic)).map(|(_, l)| l)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Topic, &AccessLevel)> {
        self.entries.iter().map(|(t, l)| (t, l))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Canonical form used in cache keys.
    pub fn fingerprint(&self) -> String {
        if self.entries.is_empty() {
            return "open".into();
        }
        let mut parts: Vec<String> = self
            .entries
            .iter()
            .map(|(t, l)| format!("{}={}", t.name.to_lowercase(), l.fingerprint()))
            .collect();
        parts.sort();
        parts.join(";")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Substitution {
    /// Character range in the original text.
    pub span: (usize, usize),
    pub surface: String,
    pub replacement: String,
    pub topic: String,
    pub level: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SanitizedMessage {
    pub message_id: String,
    pub text: String,
    /// Ordered by span, never overlapping.
    pub substitutions: Vec<Substitution>,
    /// Message id and effective-level fingerprint.
    pub cache_key: (String, String),
}

impl SanitizedMessage {
    /// Whether applying the substitutions to `original` gives `text`.
    pub fn is_consistent_with(&self, original: &str) -> bool {
        let ordered = self.substitutions.windows(2).all(|w| w[0].span.1 <= w[1].span.0);
        let surfaces = self
            .substitutions
            .iter()
            .all(|s| crate::nlp::char_slice(original, s.span) == s.surface);
        ordered && surfaces && splice(original, &self.substitutions) == self.text
    }

    pub fn ledger_json(&self) -> String {
        serde_json::to_string_pretty(&self.substitutions).expect("substitutions always serialize")
    }
}

fn splice(text: &str, subs: &[Substitution]) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut at = 0;
    for s in subs {
        out.extend(&chars[at..s.span.0]);
        out.push_str(&s.replacement);
        at = s.span.1;
    }
    out.extend(&chars[at..]);
    out
}

/// Where the monitor finds messages, rules and contacts.
pub trait Repository {
    fn annotated(&self, id: &str) -> Result<AnnotatedMessage>;

    /// `None` for a user who never stated rules.
    fn rules(&self, publisher: &str) -> Result<Option<RuleSet>>;

    /// The reader's category in `owner`'s contacts; `strangers` when none.
    fn category(&self, owner: &str, reader: &str) -> Result<String>;
}

impl Repository for ContentStore {
    fn annotated(&self, id: &str) -> Result<AnnotatedMessage> {
        self.get_annotated(id).map_err(|e| match e {
            StoreError::NotFound { .. } => Error::MessageNotFound(id.to_owned()),
            other => other.into(),
        })
    }

    fn rules(&self, publisher: &str) -> Result<Option<RuleSet>> {
        Ok(self.try_rules(publisher)?)
    }

    fn category(&self, owner: &str, reader: &str) -> Result<String> {
        Ok(self.get_category(owner, reader)?)
    }
}

#[derive(Debug, Clone, Default)]
pub struct MemoryRepository {
    pub messages: HashMap<String, AnnotatedMessage>,
    pub rules: HashMap<String, RuleSet>,
    pub contacts: ContactGraph,
}

impl MemoryRepository {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_message(&mut self, msg: AnnotatedMessage) {
        self.messages.insert(msg.message_id.clone(), msg);
    }

    pub fn add_rules(&mut self, rules: RuleSet) {
        self.rules.insert(rules.publisher.clone(), rules);
    }
}

impl Repository for MemoryRepository {
    fn annotated(&self, id: &str) -> Result<AnnotatedMessage> {
        self.messages.get(id).cloned().ok_or_else(|| Error::MessageNotFound(id.to_owned()))
    }

    fn rules(&self, publisher: &str) -> Result<Option<RuleSet>> {
        Ok(self.rules.get(publisher).cloned())
    }

    fn category(&self, owner: &str, reader: &str) -> Result<String> {
        Ok(self.contacts.category(owner, reader).to_owned())
    }
}

/// One party's contribution to a reader's levels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartyLevels {
    pub party: String,
    pub category: String,
    pub levels: Vec<(String, AccessLevel)>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MonitorStats {
    pub requests: u64,
    pub cache_hits: u64,
}

type CacheKey = (String, String);

pub struct Monitor<'a> {
    kb: &'a (dyn KnowledgeBase + Sync),
    repo: &'a (dyn Repository + Sync),
    catalog: TopicCatalog,
    cache: RwLock<HashMap<CacheKey, Arc<SanitizedMessage>>>,
    requests: AtomicU64,
    hits: AtomicU64,
}

impl<'a> Monitor<'a> {
    pub fn new(kb: &'a (dyn KnowledgeBase + Sync), repo: &'a (dyn Repository + Sync)) -> Self {
        Self::with_catalog(kb, repo, TopicCatalog::default())
    }

    pub fn with_catalog(
        kb: &'a (dyn KnowledgeBase + Sync),
        repo: &'a (dyn Repository + Sync),
        catalog: TopicCatalog,
    ) -> Self {
        Self {
            kb,
            repo,
            catalog,
            cache: RwLock::new(HashMap::new()),
            requests: AtomicU64::new(0),
            hits: AtomicU64::new(0),
        }
    }

    pub fn catalog(&self) -> &TopicCatalog {
        &self.catalog
    }

    pub fn stats(&self) -> MonitorStats {
        MonitorStats {
            requests: self.requests.load(Ordering::Relaxed),
            cache_hits: self.hits.load(Ordering::Relaxed),
        }
    }

    pub fn cached_versions(&self) -> usize {
        self.cache.read().unwrap_or_else(|p| p.into_inner()).len()
    }

    /// Each party's levels for `reader`. A reader who is a party is not
    /// restricted by their own rules. A party without rules, or without the
    /// reader's category among their categories, discloses nothing.
    pub fn party_levels(&self, msg: &AnnotatedMessage, reader: &str) -> Result<Vec<PartyLevels>> {
        let mut out = Vec::new();
        for party in msg.parties() {
            if party == reader {
                continue;
            }
            let category = self.repo.category(party, reader)?;
            let rules = match self.repo.rules(party)? {
                Some(rs) if rs.has_category(&category) => rs.rule_for(&category, &self.catalog)?,
                _ => RuleSet::deny_all(&category, &self.catalog),
            };
            let mut levels = Vec::with_capacity(rules.len());
            for rule in rules {
                let topic = self.catalog.get(&rule.st).ok_or_else(|| PolicyError::UnknownTopic(rule.st.clone()))?;
                levels.push((topic.name.clone(), AccessLevel::resolve(topic, rule.al.as_deref(), self.kb)?));
            }
            out.push(PartyLevels {
                party: party.to_owned(),
                category,
                levels,
            });
        }
        Ok(out)
    }

    /// The strictest level per topic across all parties.
    pub fn effective_levels(&self, msg: &AnnotatedMessage, reader: &str) -> Result<EffectiveLevels> {
        let parties = self.party_levels(msg, reader)?;
        let mut out = EffectiveLevels::new();
        for topic in self.catalog.iter() {
            let levels: Vec<AccessLevel> = parties
                .iter()
                .filter_map(|p| p.levels.iter().find(|(t, _)| *t == topic.name).map(|(_, l)| l.clone()))
                .collect();
            if levels.is_empty() {
                continue;
            }
            out.set(topic.clone(), resolve_conflict(&levels, self.kb)?);
        }
        Ok(out)
    }

    /// Serves `message_id` to `reader`.
    pub fn handle_access(&self, reader: &str, message_id: &str) -> Result<Arc<SanitizedMessage>> {
        self.requests.fetch_add(1, Ordering::Relaxed);
        let msg = self.repo.annotated(message_id)?;
        let levels = self.effective_levels(&msg, reader)?;
        let key = (msg.message_id.clone(), levels.fingerprint());
        if let Some(hit) = self.cache.read().unwrap_or_else(|p| p.into_inner()).get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(Arc::clone(hit));
        }
        let fresh = Arc::new(sanitize(&msg, &levels, self.kb)?);
        let mut cache = self.cache.write().unwrap_or_else(|p| p.into_inner());
        // Another request may have filled the slot meanwhile; keep the first.
        Ok(Arc::clone(cache.entry(key).or_insert(fresh)))
    }

    /// Drops cached versions of one message, or of all messages.
    pub fn invalidate(&self, message_id: Option<&str>) {
        let mut cache = self.cache.write().unwrap_or_else(|p| p.into_inner());
        match message_id {
            Some(id) => cache.retain(|(m, _), _| m != id),
            None => cache.clear(),
        }
    }
}

#[cfg(test)]
mod tests;
