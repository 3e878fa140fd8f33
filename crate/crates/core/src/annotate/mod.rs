//! Semantic annotation of messages.
//!
//! Each distinct noun-phrase head is looked up once in the knowledge base; its
//! candidate senses are the categories of the matching resources. The sense
//! combination with the smallest summed pairwise [`semantic_distance`] wins.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::kb::{ConceptId, KbError, KnowledgeBase};
use crate::nlp::{NamedEntity, Pipeline, Token};
use crate::store::ContentStore;

mod disambiguate;
mod distance;

pub use disambiguate::{
    disambiguate, disambiguate_beam, disambiguate_exhaustive, Disambiguation, SearchConfig, Strategy,
};
pub use distance::{semantic_distance, set_distance, SenseCandidate};

/// A message as published, before annotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawMessage {
    pub id: String,
    pub publisher: String,
    #[serde(default)]
    pub co_publishers: Vec<String>,
    pub text: String,
}

impl RawMessage {
    pub fn new(id: impl Into<String>, publisher: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            publisher: publisher.into(),
            co_publishers: Vec::new(),
            text: text.into(),
        }
    }

    pub fn with_co_publishers<I, S>(mut self, users: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.co_publishers.extend(users.into_iter().map(Into::into));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedPhrase {
    pub tokens: (usize, usize),
    pub span: (usize, usize),
    pub surface: String,
    pub head: String,
    pub key: String,
    pub candidates: Vec<ConceptId>,
    /// `None` when the phrase has no candidates (unannotated).
    pub chosen: Option<ConceptId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedMessage {
    pub message_id: String,
    pub publisher: String,
    pub co_publishers: Vec<String>,
    pub text: String,
    pub tokens: Vec<Token>,
    pub entities: Vec<NamedEntity>,
    pub phrases: Vec<AnnotatedPhrase>,
}

impl AnnotatedMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("annotated messages always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Publisher followed by co-publishers, without repeats.
    pub fn parties(&self) -> Vec<&str> {
        let mut out: Vec<&str> = vec![&self.publisher];
        for c in &self.co_publishers {
            if !out.contains(&c.as_str()) {
                out.push(c);
            }
        }
        out
    }

    /// Checks the structural invariants: spans inside the text and ordered,
    /// entities and phrases disjoint, chosen senses drawn from candidates.
    pub fn validate(&self) -> Result<(), String> {
        let len = self.text.chars().count();
        let mut spans: Vec<(usize, usize, &str)> = Vec::new();
        for t in &self.tokens {
            if t.span.0 >= t.span.1 || t.span.1 > len {
                return Err(format!("token `{}` has span {:?} outside the text", t.text, t.span));
            }
        }
        for w in self.tokens.windows(2) {
            if w[0].span.1 > w[1].span.0 {
                return Err("tokens overlap or are out of order".into());
            }
        }
        for e in &self.entities {
            spans.push((e.span.0, e.span.1, "entity"));
        }
        for p in &self.phrases {
            if p.head.is_empty() {
                return Err(format!("phrase `{}` has an empty head", p.surface));
            }
            if let Some(c) = &p.chosen {
                if !p.candidates.contains(c) {
                    return Err(format!("phrase `{}` chose `{c}` outside its candidates", p.surface));
                }
            } else if !p.candidates.is_empty() {
                return Err(format!("phrase `{}` has candidates but no chosen sense", p.surface));
            }
            spans.push((p.span.0, p.span.1, "phrase"));
        }
        spans.sort();
        for s in &spans {
            if s.0 >= s.1 || s.1 > len {
                return Err(format!("{} span {:?} outside the text", s.2, (s.0, s.1)));
            }
        }
        for w in spans.windows(2) {
            if w[0].1 > w[1].0 {
                return Err(format!("{} and {} spans overlap", w[0].2, w[1].2));
            }
        }
        Ok(())
    }
}

/// What one annotation run cost.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationReport {
    /// Knowledge-base title lookups issued.
    pub lookups: usize,
    pub disambiguation: Disambiguation,
}

#[derive(Debug, Default)]
pub struct Annotator {
    pipeline: Pipeline,
    search: SearchConfig,
}

impl Annotator {
    pub fn english() -> Self {
        Self::default()
    }

    pub fn new(pipeline: Pipeline, search: SearchConfig) -> Self {
        Self { pipeline, search }
    }

    pub fn pipeline(&self) -> &Pipeline {
        &self.pipeline
    }

    pub fn annotate<K: KnowledgeBase + ?Sized>(&self, msg: &RawMessage, kb: &K) -> Result<AnnotatedMessage, KbError> {
        self.annotate_with_report(msg, kb).map(|(m, _)| m)
    }

    /// Annotates and reports lookup counts and the disambiguation outcome.
    ///
    /// Phrases sharing a head share one lookup and one chosen sense.
    pub fn annotate_with_report<K: KnowledgeBase + ?Sized>(
        &self,
        msg: &RawMessage,
        kb: &K,
    ) -> Result<(AnnotatedMessage, AnnotationReport), KbError> {
        let analysis = self.pipeline.analyze(&msg.text);

        // One lookup per distinct head, in order of first occurrence.
        let mut heads: Vec<String> = Vec::new();
        for p in &analysis.phrases {
            if !heads.contains(&p.head) {
                heads.push(p.head.clone());
            }
        }
        let mut senses_by_head: Vec<Vec<ConceptId>> = Vec::with_capacity(heads.len());
        for head in &heads {
            senses_by_head.push(kb.candidate_senses(head)?);
        }
        let mut ancestors: HashMap<ConceptId, SenseCandidate> = HashMap::new();
        let mut candidates: Vec<Vec<SenseCandidate>> = Vec::with_capacity(heads.len());
        for senses in &senses_by_head {
            let mut list = Vec::with_capacity(senses.len());
            for c in senses {
                if !ancestors.contains_key(c) {
                    ancestors.insert(c.clone(), SenseCandidate::new(kb, c.clone())?);
                }
                list.push(ancestors[c].clone());
            }
            candidates.push(list);
        }
        let disambiguation = disambiguate(&candidates, &self.search);

        let phrases = analysis
            .phrases
            .into_iter()
            .map(|p| {
                let k = heads.iter().position(|h| *h == p.head).expect("head came from a phrase");
                AnnotatedPhrase {
                    tokens: p.tokens,
                    span: p.span,
                    surface: p.surface,
                    head: p.head,
                    key: p.key,
                    candidates: senses_by_head[k].clone(),
                    chosen: disambiguation.chosen[k].clone(),
                }
            })
            .collect();

        let mut co_publishers: Vec<String> = Vec::new();
        for c in &msg.co_publishers {
            if *c != msg.publisher && !co_publishers.contains(c) {
                co_publishers.push(c.clone());
            }
        }
        let annotated = AnnotatedMessage {
            message_id: msg.id.clone(),
            publisher: msg.publisher.clone(),
            co_publishers,
            text: msg.text.clone(),
            tokens: analysis.tokens,
            entities: analysis.entities,
            phrases,
        };
        let report = AnnotationReport {
            lookups: heads.len(),
            disambiguation,
        };
        Ok((annotated, report))
    }
}

/// Annotates a message and persists it. Returns the stored id.
pub fn annotate_and_store<K: KnowledgeBase + ?Sized>(
    annotator: &Annotator,
    msg: &RawMessage,
    kb: &K,
    store: &ContentStore,
) -> crate::Result<String> {
    let annotated = annotator.annotate(msg, kb)?;
    Ok(store.put_annotated(&annotated)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::TaxonomyStore;

    const FIG6: &str = "Dealing with Hiv and then being told that you suffer from AIDS is almost the hardest thing to face with in life. The hardest thing is dealing with the virus because there are people that just do not understand and think that you are a leper.";

    fn fig9() -> TaxonomyStore {
        TaxonomyStore::from_snapshot_str(include_str!("../../fixtures/fig9.taxsnap")).unwrap()
    }

    #[test]
    fn sample_message_senses() {
        let kb = fig9();
        let (m, report) = Annotator::english()
            .annotate_with_report(&RawMessage::new("m1", "net", FIG6), &kb)
            .unwrap();
        let chosen: Vec<(&str, Option<&str>)> = m
            .phrases
            .iter()
            .map(|p| (p.head.as_str(), p.chosen.as_ref().map(ConceptId::as_str)))
            .collect();
        assert_eq!(
            chosen,
            [
                ("hiv", Some("HIV")),
                ("aids", Some("AIDS")),
                ("thing", None),
                ("life", Some("Life")),
                ("thing", None),
                ("virus", Some("Viruses")),
                ("people", Some("Humans")),
                ("leper", Some("Leprosy")),
            ]
        );
        assert_eq!(report.lookups, 7);
        assert_eq!(kb.stats().lookups, 7);
        assert_eq!(m.phrases[0].candidates.len(), 5);
        m.validate().unwrap();
    }

    #[test]
    fn stopwords_only_issue_no_queries() {
        let kb = fig9();
        let m = Annotator::english()
            .annotate(&RawMessage::new("m", "p", "and then it was not so"), &kb)
            .unwrap();
        assert!(m.phrases.is_empty());
        assert_eq!(kb.stats().lookups, 0);
        let empty = Annotator::english().annotate(&RawMessage::new("e", "p", ""), &kb).unwrap();
        assert!(empty.tokens.is_empty() && empty.phrases.is_empty());
    }

    #[test]
    fn multiword_phrase_is_looked_up_by_head() {
        let kb = fig9();
        let m = Annotator::english()
            .annotate(&RawMessage::new("m", "p", "the patient life"), &kb)
            .unwrap();
        assert_eq!(m.phrases.len(), 1);
        assert_eq!(m.phrases[0].key, "patient life");
        assert_eq!(m.phrases[0].chosen.as_ref().map(ConceptId::as_str), Some("Biological_sciences"));
        assert_eq!(kb.stats().lookups, 1);
    }

    #[test]
    fn json_keeps_field_order_and_round_trips() {
        let kb = fig9();
        let msg = RawMessage::new("m1", "bob", "Dealing with Hiv").with_co_publishers(["ted", "bob", "ted"]);
        let m = Annotator::english().annotate(&msg, &kb).unwrap();
        assert_eq!(m.co_publishers, ["ted"]);
        let json = m.to_json();
        let order = ["\"message_id\"", "\"publisher\"", "\"co_publishers\"", "\"text\"", "\"tokens\"", "\"entities\"", "\"phrases\""];
        let pos: Vec<usize> = order.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(AnnotatedMessage::from_json(&json).unwrap(), m);
    }
}
