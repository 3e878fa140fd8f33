use std::collections::HashMap;
use std::path::Path;

use super::{read_resource, NlpError, Pos, PosTagger, Token};

const BUILTIN_LEXICON: &str = include_str!("../../data/lexicon.tsv");

/// Function words that are never nouns.
const CLOSED_CLASS: &[&str] = &[
    "a", "about", "above", "across", "after", "again", "against", "all", "almost", "also", "although", "am",
    "among", "an", "and", "any", "anyone", "anything", "are", "as", "at", "be", "because", "been", "before",
    "behind", "being", "below", "beneath", "beside", "between", "beyond", "both", "but", "by", "can",
    "cannot", "could", "did", "do", "does", "doing", "done", "down", "during", "each", "either", "enough",
    "even", "ever", "every", "everyone", "everything", "few", "for", "from", "had", "has", "have", "having",
    "he", "her", "here", "hers", "herself", "him", "himself", "his", "how", "however", "i", "if", "in",
    "into", "is", "it", "its", "itself", "just", "least", "less", "may", "me", "might", "mine", "more",
    "most", "much", "must", "my", "myself", "neither", "never", "no", "nobody", "nor", "not", "nothing",
    "now", "of", "off", "often", "on", "once", "one", "only", "onto", "or", "other", "others", "our",
    "ours", "ourselves", "out", "over", "own", "per", "perhaps", "quite", "rather", "really", "same",
    "shall", "she", "should", "since", "so", "some", "someone", "something", "soon", "still", "such",
    "than", "that", "the", "their", "theirs", "them", "themselves", "then", "there", "therefore", "these",
    "they", "this", "those", "though", "through", "thus", "to", "too", "toward", "towards", "under",
    "unless", "until", "up", "upon", "us", "very", "was", "we", "were", "what", "whatever", "when",
    "where", "whether", "which", "while", "who", "whom", "whose", "why", "will", "with", "within",
    "without", "would", "yes", "yet", "you", "your", "yours", "yourself", "yourselves",
];

const NOUN_SUFFIXES: [&str; 3] = ["tion", "ness", "ity"];

/// Word → tag table. Keys are lowercase.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    tags: HashMap<String, Pos>,
}

impl Lexicon {
    /// The bundled general-purpose English noun list.
    pub fn english() -> Self {
        Self::parse(BUILTIN_LEXICON, "<builtin lexicon>").expect("bundled lexicon is well formed")
    }

    /// Parses `word<TAB>tag` lines (tags `NN`, `NNS`, `NNP`, `other`).
    pub fn from_tsv(text: &str) -> Result<Self, NlpError> {
        Self::parse(text, "<lexicon>")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NlpError> {
        let path = path.as_ref();
        Self::parse(&read_resource(path)?, &path.display().to_string())
    }

    fn parse(text: &str, origin: &str) -> Result<Self, NlpError> {
        let mut lex = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| NlpError::Resource {
                path: origin.to_owned(),
                line: n + 1,
                message: message.to_owned(),
            };
            let (word, tag) = line.split_once('\t').ok_or_else(|| err("expected word<TAB>tag"))?;
            let tag = Pos::parse(tag).ok_or_else(|| err("unknown tag"))?;
            let word = word.trim();
            if word.is_empty() {
                return Err(err("empty word"));
            }
            lex.insert(word, tag);
        }
        Ok(lex)
    }

    pub fn insert(&mut self, word: &str, tag: Pos) {
        self.tags.insert(word.to_lowercase(), tag);
    }

    /// Entries of `other` override the built-in list with later files.
    pub fn extend(&mut self, other: Lexicon) {
        self.tags.extend(other.tags);
    }

    pub fn get(&self, word: &str) -> Option<Pos> {
        self.tags.get(&word.to_lowercase()).copied()
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

/// Lexicon lookup, then closed-class words, suffix rules, plural detection
/// and capitalization.
#[derive(Debug, Clone)]
pub struct RuleTagger {
    lexicon: Lexicon,
}

impl RuleTagger {
    pub fn new(lexicon: Lexicon) -> Self {
        Self { lexicon }
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    /// Singular nouns: listed as NN, or ending in a noun suffix.
    fn is_singular_noun(&self, lower: &str) -> bool {
        match self.lexicon.get(lower) {
            Some(p) => p == Pos::NN,
            None => {
                !CLOSED_CLASS.contains(&lower)
                    && NOUN_SUFFIXES.iter().any(|s| lower.len() > s.len() + 2 && lower.ends_with(s))
            }
        }
    }

    fn tag_word(&self, tok: &Token, sentence_initial: bool) -> Pos {
        if !tok.text.chars().next().is_some_and(char::is_alphabetic) {
            return Pos::Other;
        }
        let lower = tok.text.to_lowercase();
        if let Some(p) = self.lexicon.get(&lower) {
            return p;
        }
        if CLOSED_CLASS.contains(&lower.as_str()) {
            return Pos::Other;
        }
        if self.is_singular_noun(&lower) {
            return Pos::NN;
        }
        if self.singular(&lower).is_some() {
            return Pos::NNS;
        }
        let capitalized = tok.text.chars().next().is_some_and(char::is_uppercase);
        let acronym = tok.text.chars().count() > 1 && tok.text.chars().all(|c| !c.is_lowercase());
        if capitalized && (!sentence_initial || acronym) {
            return Pos::NNP;
        }
        Pos::Other
    }
}

impl PosTagger for RuleTagger {
    fn tag(&self, tokens: &mut [Token], masked: &[bool]) {
        let mut sentence_initial = true;
        for (i, tok) in tokens.iter_mut().enumerate() {
            let pos = if masked.get(i).copied().unwrap_or(false) {
                Pos::Other
            } else {
                self.tag_word(tok, sentence_initial)
            };
            tok.pos = pos;
            if matches!(tok.text.as_str(), "." | "!" | "?") {
                sentence_initial = true;
            } else if tok.is_word() {
                sentence_initial = false;
            }
        }
    }

    fn singular(&self, word: &str) -> Option<String> {
        let lower = word.to_lowercase();
        if lower.ends_with("ss") || !lower.ends_with('s') {
            return None;
        }
        let candidates = [
            lower.strip_suffix("ies").map(|s| format!("{s}y")),
            lower.strip_suffix("es").map(str::to_owned),
            lower.strip_suffix('s').map(str::to_owned),
        ];
        candidates
            .into_iter()
            .flatten()
            .find(|stem| !stem.is_empty() && self.is_singular_noun(stem))
    }
}
