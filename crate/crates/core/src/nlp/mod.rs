//! Deterministic English front end.
//!
//! [`Pipeline::analyze`] runs tokenization, named-entity recognition,
//! part-of-speech tagging and noun-phrase chunking. Entity tokens are masked
//! before tagging so they never end up inside a noun phrase. The recognizer
//! and tagger are traits; the bundled implementations are gazetteer, lexicon
//! and rule based.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod chunk;
mod ner;
mod pos;
mod tokenize;

pub use chunk::chunk_noun_phrases;
pub use ner::{Gazetteer, RuleRecognizer};
pub use pos::{Lexicon, RuleTagger};
pub use tokenize::tokenize;

/// Part-of-speech tag. Only the noun distinctions matter downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pos {
    NN,
    NNS,
    NNP,
    #[serde(rename = "other")]
    Other,
}

impl Pos {
    pub fn is_noun(self) -> bool {
        !matches!(self, Pos::Other)
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "NN" => Some(Pos::NN),
            "NNS" => Some(Pos::NNS),
            "NNP" => Some(Pos::NNP),
            "other" | "OTHER" | "Other" => Some(Pos::Other),
            _ => None,
        }
    }
}

/// A token with character offsets `[start, end)` into the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub span: (usize, usize),
    pub pos: Pos,
}

impl Token {
    pub fn is_word(&self) -> bool {
        self.text.chars().next().is_some_and(char::is_alphanumeric)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityCategory {
    Time,
    Location,
    Organization,
    Person,
    Money,
    Percent,
    Date,
}

impl EntityCategory {
    pub const ALL: [EntityCategory; 7] = [
        EntityCategory::Time,
        EntityCategory::Location,
        EntityCategory::Organization,
        EntityCategory::Person,
        EntityCategory::Money,
        EntityCategory::Percent,
        EntityCategory::Date,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EntityCategory::Time => "Time",
            EntityCategory::Location => "Location",
            EntityCategory::Organization => "Organization",
            EntityCategory::Person => "Person",
            EntityCategory::Money => "Money",
            EntityCategory::Percent => "Percent",
            EntityCategory::Date => "Date",
        }
    }

    /// Case-insensitive parse of the category name.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        Self::ALL.into_iter().find(|c| c.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for EntityCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedEntity {
    /// Token range `[start, end)`.
    pub tokens: (usize, usize),
    /// Character range `[start, end)`.
    pub span: (usize, usize),
    pub category: EntityCategory,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounPhrase {
    /// Token range `[start, end)`.
    pub tokens: (usize, usize),
    /// Character range `[start, end)`.
    pub span: (usize, usize),
    pub surface: String,
    /// Last noun of the phrase, lowercased; singularized when tagged NNS.
    pub head: String,
    /// Lowercased modifiers followed by the head.
    pub key: String,
}

pub trait EntityRecognizer {
    fn recognize(&self, tokens: &[Token]) -> Vec<NamedEntity>;
}

pub trait PosTagger {
    /// Tags every token. Tokens with `masked[i]` set are tagged `Other`.
    fn tag(&self, tokens: &mut [Token], masked: &[bool]);

    /// Singular form of a plural noun, if the tagger knows one.
    fn singular(&self, word: &str) -> Option<String>;
}

#[derive(Debug, Error)]
pub enum NlpError {
    #[error("{path}:{line}: {message}")]
    Resource {
        path: String,
        line: usize,
        message: String,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub(crate) fn read_resource(path: &Path) -> Result<String, NlpError> {
    std::fs::read_to_string(path).map_err(|source| NlpError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Output of [`Pipeline::analyze`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    pub tokens: Vec<Token>,
    pub entities: Vec<NamedEntity>,
    pub phrases: Vec<NounPhrase>,
}

pub struct Pipeline {
    recognizer: Box<dyn EntityRecognizer + Send + Sync>,
    tagger: Box<dyn PosTagger + Send + Sync>,
}

impl fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pipeline").finish_non_exhaustive()
    }
}

impl Default for Pipeline {
    fn default() -> Self {
        Self::english()
    }
}

impl Pipeline {
    /// Built-in lexicon, empty gazetteer.
    pub fn english() -> Self {
        Self::new(RuleRecognizer::default(), RuleTagger::new(Lexicon::english()))
    }

    pub fn new(
        recognizer: impl EntityRecognizer + Send + Sync + 'static,
        tagger: impl PosTagger + Send + Sync + 'static,
    ) -> Self {
        Self {
            recognizer: Box::new(recognizer),
            tagger: Box::new(tagger),
        }
    }

    pub fn analyze(&self, text: &str) -> Analysis {
        let mut tokens = tokenize(text);
        let mut entities = self.recognizer.recognize(&tokens);
        for e in &mut entities {
            e.surface = char_slice(text, e.span).to_owned();
        }
        let mut masked = vec![false; tokens.len()];
        for e in &entities {
            masked[e.tokens.0..e.tokens.1].iter_mut().for_each(|m| *m = true);
        }
        self.tagger.tag(&mut tokens, &masked);
        let mut phrases = chunk_noun_phrases(&tokens, |w| self.tagger.singular(w));
        for p in &mut phrases {
            p.surface = char_slice(text, p.span).to_owned();
        }
        Analysis {
            tokens,
            entities,
            phrases,
        }
    }
}

/// Substring of `text` between two character offsets.
pub fn char_slice(text: &str, span: (usize, usize)) -> &str {
    let mut idx = text.char_indices().map(|(b, _)| b).chain(std::iter::once(text.len()));
    let start = idx.nth(span.0).unwrap_or(text.len());
    let end = if span.1 > span.0 {
        idx.nth(span.1 - span.0 - 1).unwrap_or(text.len())
    } else {
        start
    };
    &text[start..end]
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG6: &str = "Dealing with Hiv and then being told that you suffer from AIDS is almost the hardest thing to face with in life. The hardest thing is dealing with the virus because there are people that just do not understand and think that you are a leper.";

    #[test]
    fn sample_message_tags_and_phrases() {
        let a = Pipeline::english().analyze(FIG6);
        let nouns: Vec<(&str, Pos)> = a
            .tokens
            .iter()
            .filter(|t| t.pos.is_noun())
            .map(|t| (t.text.as_str(), t.pos))
            .collect();
        assert_eq!(
            nouns,
            [
                ("Hiv", Pos::NNP),
                ("AIDS", Pos::NNP),
                ("thing", Pos::NN),
                ("life", Pos::NN),
                ("thing", Pos::NN),
                ("virus", Pos::NN),
                ("people", Pos::NNS),
                ("leper", Pos::NN),
            ]
        );
        let heads: Vec<&str> = a.phrases.iter().map(|p| p.head.as_str()).collect();
        assert_eq!(heads, ["hiv", "aids", "thing", "life", "thing", "virus", "people", "leper"]);
        assert!(a.entities.is_empty());
    }

    #[test]
    fn entities_are_withheld_from_phrases() {
        let gaz = Gazetteer::from_tsv("Bob\tPerson\nBerlin\tLocation\n").unwrap();
        let p = Pipeline::new(RuleRecognizer::new(gaz), RuleTagger::new(Lexicon::english()));
        let a = p.analyze("Bob visited the hospital in Berlin");
        assert_eq!(a.entities.len(), 2);
        let surfaces: Vec<&str> = a.phrases.iter().map(|p| p.surface.as_str()).collect();
        assert_eq!(surfaces, ["hospital"]);
        for ph in &a.phrases {
            for e in &a.entities {
                assert!(ph.tokens.1 <= e.tokens.0 || e.tokens.1 <= ph.tokens.0);
            }
        }
    }

    #[test]
    fn char_slice_counts_characters() {
        let s = "naïve café";
        assert_eq!(char_slice(s, (6, 10)), "café");
        assert_eq!(char_slice(s, (0, 5)), "naïve");
        assert_eq!(char_slice(s, (3, 3)), "");
    }
}
