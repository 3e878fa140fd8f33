use std::collections::HashMap;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;

use super::{read_resource, EntityCategory, EntityRecognizer, NamedEntity, NlpError, Token};

/// Surface forms with a known entity category. Entries may span several
/// tokens and match case-insensitively, but only when the first matched
/// token in the text starts with a capital letter or digit.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    /// First token (lowercased) → entries, longest first.
    entries: HashMap<String, Vec<(Vec<String>, EntityCategory)>>,
}

impl Gazetteer {
    /// Parses `surface<TAB>category` lines; `#` lines are comments.
    pub fn from_tsv(text: &str) -> Result<Self, NlpError> {
        Self::parse(text, "<gazetteer>")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NlpError> {
        let path = path.as_ref();
        Self::parse(&read_resource(path)?, &path.display().to_string())
    }

    fn parse(text: &str, origin: &str) -> Result<Self, NlpError> {
        let mut g = Self::default();
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
            let (surface, cat) = line.split_once('\t').ok_or_else(|| err("expected surface<TAB>category"))?;
            let category = EntityCategory::parse(cat).ok_or_else(|| err("unknown entity category"))?;
            let words: Vec<String> = super::tokenize(surface).into_iter().map(|t| t.text.to_lowercase()).collect();
            if words.is_empty() {
                return Err(err("empty surface"));
            }
            g.insert(words, category);
        }
        Ok(g)
    }

    pub fn insert(&mut self, words: Vec<String>, category: EntityCategory) {
        let slot = self.entries.entry(words[0].clone()).or_default();
        slot.retain(|(w, _)| *w != words);
        slot.push((words, category));
        slot.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn longest_at(&self, tokens: &[Token], i: usize) -> Option<(usize, EntityCategory)> {
        let first = &tokens[i].text;
        if !first.chars().next().is_some_and(|c| c.is_uppercase() || c.is_ascii_digit()) {
            return None;
        }
        self.entries.get(&first.to_lowercase())?.iter().find_map(|(words, cat)| {
            let window = tokens.get(i..i + words.len())?;
            window
                .iter()
                .zip(words)
                .all(|(t, w)| t.text.to_lowercase() == *w)
                .then_some((words.len(), *cat))
        })
    }
}

static NUMBER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\d+(?:[.,]\d+)*$").unwrap());
static DAY: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(?:[1-9]|[12]\d|3[01])(?:st|nd|rd|th)?$").unwrap());
static YEAR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(?:1[5-9]|20)\d\d$").unwrap());
static NUMERIC_DATE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?:\d{4}-\d{1,2}-\d{1,2}|\d{1,2}[/.-]\d{1,2}[/.-]\d{2,4})$").unwrap());
static CLOCK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(?:[01]?\d|2[0-3]):[0-5]\d(?::[0-5]\d)?$").unwrap());
static HOUR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(?:[1-9]|1[0-2])$").unwrap());

const MONTHS: [&str; 21] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September", "October",
    "November", "December", "Jan", "Feb", "Mar", "Apr", "Jun", "Jul", "Aug", "Sep", "Oct",
];
const MONTHS_TAIL: [&str; 3] = ["Sept", "Nov", "Dec"];
const WEEKDAYS: [&str; 7] = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"];
const CURRENCY_SYMBOLS: [&str; 4] = ["$", "€", "£", "¥"];
const CURRENCY_WORDS: [&str; 10] = [
    "dollar", "dollars", "euro", "euros", "pound", "pounds", "usd", "eur", "gbp", "yen",
];
const SCALES: [&str; 4] = ["thousand", "million", "billion", "trillion"];
const TITLES: [&str; 7] = ["mr", "mrs", "ms", "dr", "prof", "sir", "madam"];

fn is_month(t: &str) -> bool {
    MONTHS.contains(&t) || MONTHS_TAIL.contains(&t)
}

fn text(tokens: &[Token], i: usize) -> Option<&str> {
    tokens.get(i).map(|t| t.text.as_str())
}

fn is_capitalized(t: &str) -> bool {
    t.chars().next().is_some_and(char::is_uppercase)
}

/// Length in tokens of a match starting at the given index.
type Matcher = fn(&[Token], usize) -> Option<usize>;

/// Gazetteer lookup plus patterns for dates, times, money, percentages and
/// title-prefixed person names (`Dr Smith`).
#[derive(Debug, Clone, Default)]
pub struct RuleRecognizer {
    gazetteer: Gazetteer,
}

impl RuleRecognizer {
    pub fn new(gazetteer: Gazetteer) -> Self {
        Self { gazetteer }
    }

    fn percent(tokens: &[Token], i: usize) -> Option<usize> {
        NUMBER.is_match(text(tokens, i)?).then_some(())?;
        match text(tokens, i + 1)? {
            "%" => Some(2),
            w if w.eq_ignore_ascii_case("percent") => Some(2),
            w if w.eq_ignore_ascii_case("per") && text(tokens, i + 2)?.eq_ignore_ascii_case("cent") => Some(3),
            _ => None,
        }
    }

    fn money(tokens: &[Token], i: usize) -> Option<usize> {
        let scale = |j: usize| text(tokens, j).is_some_and(|w| SCALES.contains(&w.to_lowercase().as_str()));
        let first = text(tokens, i)?;
        if CURRENCY_SYMBOLS.contains(&first) {
            NUMBER.is_match(text(tokens, i + 1)?).then_some(())?;
            return Some(if scale(i + 2) { 3 } else { 2 });
        }
        NUMBER.is_match(first).then_some(())?;
        let mut len = 1;
        if scale(i + len) {
            len += 1;
        }
        let unit = text(tokens, i + len)?.to_lowercase();
        CURRENCY_WORDS.contains(&unit.as_str()).then_some(len + 1)
    }

    fn date(tokens: &[Token], i: usize) -> Option<usize> {
        let first = text(tokens, i)?;
        if NUMERIC_DATE.is_match(first) || WEEKDAYS.contains(&first) {
            return Some(1);
        }
        let year_after = |j: usize| -> usize {
            match (text(tokens, j), text(tokens, j + 1)) {
                (Some(y), _) if YEAR.is_match(y) => 1,
                (Some(","), Some(y)) if YEAR.is_match(y) => 2,
                _ => 0,
            }
        };
        if DAY.is_match(first) && text(tokens, i + 1).is_some_and(is_month) {
            // 4 July [2020]
            return Some(2 + year_after(i + 2));
        }
        if is_month(first) {
            if text(tokens, i + 1).is_some_and(|d| DAY.is_match(d)) {
                // July 4[, 2020]
                return Some(2 + year_after(i + 2));
            }
            if text(tokens, i + 1).is_some_and(|y| YEAR.is_match(y)) {
                return Some(2);
            }
        }
        None
    }

    fn time(tokens: &[Token], i: usize) -> Option<usize> {
        let first = text(tokens, i)?;
        let meridiem = |j: usize| text(tokens, j).is_some_and(|w| matches!(w.to_lowercase().as_str(), "am" | "pm"));
        if CLOCK.is_match(first) {
            return Some(if meridiem(i + 1) { 2 } else { 1 });
        }
        (HOUR.is_match(first) && meridiem(i + 1)).then_some(2)
    }

    fn person(tokens: &[Token], i: usize) -> Option<usize> {
        let first = text(tokens, i)?;
        if !is_capitalized(first) || !TITLES.contains(&first.to_lowercase().as_str()) {
            return None;
        }
        let mut j = i + 1;
        if text(tokens, j) == Some(".") {
            j += 1;
        }
        let names_start = j;
        while text(tokens, j).is_some_and(|w| is_capitalized(w) && tokens[j].is_word()) {
            j += 1;
        }
        (j > names_start).then_some(j - i)
    }

    fn best_at(&self, tokens: &[Token], i: usize) -> Option<(usize, EntityCategory)> {
        let mut best = self.gazetteer.longest_at(tokens, i);
        let patterns: [(Matcher, EntityCategory); 5] = [
            (Self::date, EntityCategory::Date),
            (Self::time, EntityCategory::Time),
            (Self::money, EntityCategory::Money),
            (Self::percent, EntityCategory::Percent),
            (Self::person, EntityCategory::Person),
        ];
        for (rule, cat) in patterns {
            if let Some(len) = rule(tokens, i) {
                if best.is_none_or(|(b, _)| len > b) {
                    best = Some((len, cat));
                }
            }
        }
        best
    }
}

impl EntityRecognizer for RuleRecognizer {
    fn recognize(&self, tokens: &[Token]) -> Vec<NamedEntity> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            match self.best_at(tokens, i) {
                Some((len, category)) => {
                    let end = i + len;
                    let span = (tokens[i].span.0, tokens[end - 1].span.1);
                    let mut surface = String::new();
                    for (k, t) in tokens[i..end].iter().enumerate() {
                        if k > 0 && t.span.0 > tokens[i + k - 1].span.1 {
                            surface.push(' ');
                        }
                        surface.push_str(&t.text);
                    }
                    out.push(NamedEntity {
                        tokens: (i, end),
                        span,
                        category,
                        surface,
                    });
                    i = end;
                }
                None => i += 1,
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::tokenize;

    fn run(r: &RuleRecognizer, text: &str) -> Vec<(EntityCategory, String)> {
        r.recognize(&tokenize(text)).into_iter().map(|e| (e.category, e.surface)).collect()
    }

    #[test]
    fn gazetteer_entries() {
        let g = Gazetteer::from_tsv("Bob\tPerson\nBerlin\tLocation\nWorld Health Organization\torganization\n").unwrap();
        let r = RuleRecognizer::new(g);
        assert_eq!(
            run(&r, "Bob lives in Berlin"),
            [(EntityCategory::Person, "Bob".into()), (EntityCategory::Location, "Berlin".into())]
        );
        assert_eq!(
            run(&r, "the World Health Organization said"),
            [(EntityCategory::Organization, "World Health Organization".into())]
        );
        assert!(run(&r, "bob lives in berlin").is_empty());
    }

    #[test]
    fn lowercase_text_without_gazetteer_has_no_entities() {
        assert!(run(&RuleRecognizer::default(), "nothing to see here, really").is_empty());
    }

    #[test]
    fn patterns() {
        let r = RuleRecognizer::default();
        assert_eq!(
            run(&r, "50% on 4 July 2020"),
            [(EntityCategory::Percent, "50%".into()), (EntityCategory::Date, "4 July 2020".into())]
        );
        assert_eq!(run(&r, "paid $20 million"), [(EntityCategory::Money, "$20 million".into())]);
        assert_eq!(run(&r, "cost 300 euros"), [(EntityCategory::Money, "300 euros".into())]);
        assert_eq!(run(&r, "at 10:30 pm"), [(EntityCategory::Time, "10:30 pm".into())]);
        assert_eq!(run(&r, "on July 4, 2021"), [(EntityCategory::Date, "July 4, 2021".into())]);
        assert_eq!(run(&r, "since 2019-03-02"), [(EntityCategory::Date, "2019-03-02".into())]);
        assert_eq!(run(&r, "saw Dr. Jane Smith today"), [(EntityCategory::Person, "Dr. Jane Smith".into())]);
        assert!(run(&r, "I may go, 4 of us").is_empty());
    }

    #[test]
    fn bad_gazetteer_line() {
        let err = Gazetteer::from_tsv("# c\nBob\tWizard\n").unwrap_err();
        assert!(matches!(err, NlpError::Resource { line: 2, .. }));
    }
}
