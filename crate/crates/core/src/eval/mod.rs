//! Precision, recall and F-measure for sensitive-term detection and for
//! sense disambiguation.
//!
//! Gold files are TSV, one occurrence per line:
//! `doc<TAB>key<TAB>start<TAB>end<TAB>surface`, with character offsets. For
//! detection the key is the access-level label; for disambiguation it is
//! the expected concept id.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::{Annotator, RawMessage};
use crate::engine::{sanitize, EffectiveLevels};
use crate::kb::KnowledgeBase;
use crate::nlp::char_slice;
use crate::policy::{AccessLevel, TopicCatalog};

pub mod bundled;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold file line {line}: {message}")]
    Gold { line: usize, message: String },
    #[error("corpus manifest: {0}")]
    Manifest(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// `|S ∩ H| / |S|` as a percentage. Both empty gives 100; an empty system
/// set against a non-empty gold set has no defined precision.
pub fn precision<T: Ord>(system: &BTreeSet<T>, gold: &BTreeSet<T>) -> Option<f64> {
    if system.is_empty() {
        return gold.is_empty().then_some(100.0);
    }
    Some(system.intersection(gold).count() as f64 / system.len() as f64 * 100.0)
}

/// `|S ∩ H| / |H|` as a percentage; undefined for an empty gold set.
pub fn recall<T: Ord>(system: &BTreeSet<T>, gold: &BTreeSet<T>) -> Option<f64> {
    if gold.is_empty() {
        return None;
    }
    Some(system.intersection(gold).count() as f64 / gold.len() as f64 * 100.0)
}

/// Harmonic mean of two percentages, 0 when both are 0.
pub fn f_measure(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldRow {
    pub line: usize,
    pub doc: String,
    pub key: String,
    pub span: (usize, usize),
    pub surface: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldFile {
    pub rows: Vec<GoldRow>,
}

impl GoldFile {
    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let mut rows = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let raw = raw.trim_end_matches('\r');
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let err = |message: &str| EvalError::Gold {
                line,
                message: message.to_owned(),
            };
            let f: Vec<&str> = raw.split('\t').collect();
            let [doc, key, start, end, surface] = f[..] else {
                return Err(err("expected doc, key, start, end, surface"));
            };
            let start: usize = start.trim().parse().map_err(|_| err("start is not a number"))?;
            let end: usize = end.trim().parse().map_err(|_| err("end is not a number"))?;
            if start >= end {
                return Err(err("empty or reversed span"));
            }
            rows.push(GoldRow {
                line,
                doc: doc.trim().to_owned(),
                key: key.trim().to_owned(),
                span: (start, end),
                surface: surface.to_owned(),
            });
        }
        Ok(Self { rows })
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        Self::parse(&read(path)?)
    }

    pub fn rows_for<'a>(&'a self, doc: &'a str) -> impl Iterator<Item = &'a GoldRow> + 'a {
        self.rows.iter().filter(move |r| r.doc == doc)
    }

    /// Checks every row's surface against the document text.
    pub fn check_against(&self, manifest: &Manifest) -> Result<(), EvalError> {
        for row in &self.rows {
            let Some(doc) = manifest.documents.iter().find(|d| d.id == row.doc) else {
                continue;
            };
            if row.span.1 > doc.text.chars().count() || char_slice(&doc.text, row.span) != row.surface {
                return Err(EvalError::Gold {
                    line: row.line,
                    message: format!("`{}` is not at {:?} in `{}`", row.surface, row.span, row.doc),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default)]
    pub text: String,
    /// Read into `text` by [`Manifest::load`], relative to the manifest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default = "default_topic")]
    pub topic: String,
    /// Access-level labels each document is evaluated under.
    #[serde(default)]
    pub levels: Vec<String>,
    pub documents: Vec<Document>,
}

fn default_topic() -> String {
    "medical health".into()
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        serde_json::from_str(text).map_err(|e| EvalError::Manifest(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let mut m = Self::from_json(&read(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for d in &mut m.documents {
            if let Some(p) = &d.path {
                d.text = read(&base.join(p))?;
            }
        }
        Ok(m)
    }
}

fn read(path: &Path) -> Result<String, EvalError> {
    std::fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_owned(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub document: String,
    pub level: String,
    /// `|H|`
    pub gold: usize,
    /// `|S|`
    pub system: usize,
    /// `|S ∩ H|`
    pub correct: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f_measure: Option<f64>,
}

impl EvalReport {
    pub fn from_sets<T: Ord>(document: &str, level: &str, system: &BTreeSet<T>, gold: &BTreeSet<T>) -> Self {
        let p = precision(system, gold);
        let r = recall(system, gold);
        Self {
            document: document.to_owned(),
            level: level.to_owned(),
            gold: gold.len(),
            system: system.len(),
            correct: system.intersection(gold).count(),
            precision: p,
            recall: r,
            f_measure: p.zip(r).map(|(p, r)| f_measure(p, r)),
        }
    }

    /// A row whose gold entries are missing altogether.
    pub fn not_applicable(document: &str, level: &str, system: usize) -> Self {
        Self {
            document: document.to_owned(),
            level: level.to_owned(),
            gold: 0,
            system,
            correct: 0,
            precision: None,
            recall: None,
            f_measure: None,
        }
    }

    /// Micro-average over rows with gold entries.
    pub fn pooled(label: &str, rows: &[EvalReport]) -> Self {
        let scored: Vec<&EvalReport> = rows.iter().filter(|r| r.gold > 0 || r.precision.is_some()).collect();
        let (gold, system, correct) = scored
            .iter()
            .fold((0, 0, 0), |(g, s, c), r| (g + r.gold, s + r.system, c + r.correct));
        let p = match (system, gold) {
            (0, 0) => Some(100.0),
            (0, _) => None,
            _ => Some(correct as f64 / system as f64 * 100.0),
        };
        let r = (gold > 0).then(|| correct as f64 / gold as f64 * 100.0);
        Self {
            document: label.to_owned(),
            level: String::new(),
            gold,
            system,
            correct,
            precision: p,
            recall: r,
            f_measure: p.zip(r).map(|(p, r)| f_measure(p, r)),
        }
    }
}

/// Runs annotation and sanitization for every document under every level
/// and scores the sanitized spans against the gold occurrences.
pub fn eval_detect<K: KnowledgeBase + ?Sized>(
    manifest: &Manifest,
    gold: &GoldFile,
    kb: &K,
    annotator: &Annotator,
    catalog: &TopicCatalog,
) -> crate::Result<Vec<EvalReport>> {
    let topic = catalog
        .get(&manifest.topic)
        .ok_or_else(|| EvalError::Manifest(format!("unknown topic `{}`", manifest.topic)))?;
    let mut levels = Vec::with_capacity(manifest.levels.len());
    for label in &manifest.levels {
        let level = AccessLevel::resolve(topic, Some(label), kb)?;
        levels.push((label, EffectiveLevels::new().with(topic.clone(), level)));
    }
    let mut out = Vec::new();
    for doc in &manifest.documents {
        let annotated = annotator.annotate(&RawMessage::new(&doc.id, "corpus", &doc.text), kb)?;
        for (label, effective) in &levels {
            let sanitized = sanitize(&annotated, effective, kb)?;
            let system: BTreeSet<(usize, usize)> = sanitized.substitutions.iter().map(|s| s.span).collect();
            let rows: Vec<&GoldRow> = gold.rows_for(&doc.id).filter(|r| r.key == **label).collect();
            if rows.is_empty() {
                out.push(EvalReport::not_applicable(&doc.id, label, system.len()));
                continue;
            }
            let gold: BTreeSet<(usize, usize)> = rows.iter().map(|r| r.span).collect();
            out.push(EvalReport::from_sets(&doc.id, label, &system, &gold));
        }
    }
    Ok(out)
}

/// Scores chosen senses against gold senses, one row per document. The
/// system set holds every annotated phrase occurrence with its sense.
pub fn eval_wsd<K: KnowledgeBase + ?Sized>(
    manifest: &Manifest,
    gold: &GoldFile,
    kb: &K,
    annotator: &Annotator,
) -> crate::Result<Vec<EvalReport>> {
    let mut out = Vec::new();
    for doc in &manifest.documents {
        let annotated = annotator.annotate(&RawMessage::new(&doc.id, "corpus", &doc.text), kb)?;
        let system: BTreeSet<((usize, usize), String)> = annotated
            .phrases
            .iter()
            .filter_map(|p| p.chosen.as_ref().map(|c| (p.span, c.as_str().to_owned())))
            .collect();
        let rows: Vec<&GoldRow> = gold.rows_for(&doc.id).collect();
        if rows.is_empty() {
            out.push(EvalReport::not_applicable(&doc.id, "senses", system.len()));
            continue;
        }
        let gold: BTreeSet<((usize, usize), String)> = rows.iter().map(|r| (r.span, r.key.clone())).collect();
        out.push(EvalReport::from_sets(&doc.id, "senses", &system, &gold));
    }
    Ok(out)
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.2}"))
}

/// Plain-text table, one row per report plus a pooled row.
pub fn render_table(rows: &[EvalReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:<16} {:>4} {:>4} {:>4} {:>9} {:>9} {:>9}",
        "document", "level", "|H|", "|S|", "S∩H", "precision", "recall", "f-measure"
    );
    let pooled = EvalReport::pooled("all", rows);
    for r in rows.iter().chain(std::iter::once(&pooled)) {
        let _ = writeln!(
            out,
            "{:<10} {:<16} {:>4} {:>4} {:>4} {:>9} {:>9} {:>9}",
            r.document,
            r.level,
            r.gold,
            r.system,
            r.correct,
            pct(r.precision),
            pct(r.recall),
            pct(r.f_measure)
        );
    }
    out
}
