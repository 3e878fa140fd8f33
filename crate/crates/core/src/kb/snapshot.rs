//! Snapshot file format.
//!
//! UTF-8, one tab-separated record per line, records in any order:
//!
//! ```text
//! # taxsnap v1
//! C   <concept-id>    <label[|alias...]>  <parent-ids, comma separated>
//! R   <resource-id>   <title>             <concept-id>
//! P   <resource-id>   <property-name>     <target-resource-id>
//! K   <resource-id>   <category-concept-id>
//! ```
//!
//! The first line must be the header. Other lines starting with `#` and blank
//! lines are ignored.

use std::fmt;

use super::{ConceptId, KbError, ResourceId};

pub const HEADER: &str = "# taxsnap v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptRecord {
    pub line: usize,
    pub id: ConceptId,
    pub labels: Vec<String>,
    pub parents: Vec<ConceptId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceRecord {
    pub line: usize,
    pub id: ResourceId,
    pub title: String,
    pub concept: ConceptId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyRecord {
    pub line: usize,
    pub subject: ResourceId,
    pub property: String,
    pub target: ResourceId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryRecord {
    pub line: usize,
    pub resource: ResourceId,
    pub category: ConceptId,
}

/// Parsed but not yet validated snapshot.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Snapshot {
    pub concepts: Vec<ConceptRecord>,
    pub resources: Vec<ResourceRecord>,
    pub properties: Vec<PropertyRecord>,
    pub categories: Vec<CategoryRecord>,
}

fn parse_error(line: usize, message: impl Into<String>) -> KbError {
    KbError::Parse {
        line,
        message: message.into(),
    }
}

fn non_empty(line: usize, what: &str, value: &str) -> Result<String, KbError> {
    let v = value.trim();
    if v.is_empty() {
        Err(parse_error(line, format!("empty {what}")))
    } else {
        Ok(v.to_owned())
    }
}

pub fn parse(text: &str) -> Result<Snapshot, KbError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, first)) if first.trim_end() == HEADER => {}
        Some((n, _)) => return Err(parse_error(n, format!("expected header `{HEADER}`"))),
        None => return Err(parse_error(1, format!("missing header `{HEADER}`"))),
    }

    let mut snap = Snapshot::default();
    for (n, raw) in lines {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match fields[0] {
            "C" => {
                if fields.len() != 4 && fields.len() != 3 {
                    return Err(parse_error(n, "concept record needs 3 fields after `C`"));
                }
                let id = ConceptId(non_empty(n, "concept id", fields[1])?);
                let labels: Vec<String> = fields[2]
                    .split('|')
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(str::to_owned)
                    .collect();
                if labels.is_empty() {
                    return Err(parse_error(n, "empty concept label"));
                }
                let parents = fields
                    .get(3)
                    .map(|p| {
                        p.split(',')
                            .map(str::trim)
                            .filter(|p| !p.is_empty())
                            .map(ConceptId::from)
                            .collect()
                    })
                    .unwrap_or_default();
                snap.concepts.push(ConceptRecord {
                    line: n,
                    id,
                    labels,
                    parents,
                });
            }
            "R" => {
                if fields.len() != 4 {
                    return Err(parse_error(n, "resource record needs 3 fields after `R`"));
                }
                snap.resources.push(ResourceRecord {
                    line: n,
                    id: ResourceId(non_empty(n, "resource id", fields[1])?),
                    title: non_empty(n, "title", fields[2])?,
                    concept: ConceptId(non_empty(n, "concept id", fields[3])?),
                });
            }
            "P" => {
                if fields.len() != 4 {
                    return Err(parse_error(n, "property record needs 3 fields after `P`"));
                }
                snap.properties.push(PropertyRecord {
                    line: n,
                    subject: ResourceId(non_empty(n, "resource id", fields[1])?),
                    property: non_empty(n, "property name", fields[2])?,
                    target: ResourceId(non_empty(n, "target resource id", fields[3])?),
                });
            }
            "K" => {
                if fields.len() != 3 {
                    return Err(parse_error(n, "category record needs 2 fields after `K`"));
                }
                snap.categories.push(CategoryRecord {
                    line: n,
                    resource: ResourceId(non_empty(n, "resource id", fields[1])?),
                    category: ConceptId(non_empty(n, "category id", fields[2])?),
                });
            }
            other => return Err(parse_error(n, format!("unknown record kind `{other}`"))),
        }
    }
    Ok(snap)
}

impl fmt::Display for Snapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{HEADER}")?;
        for c in &self.concepts {
            let parents: Vec<&str> = c.parents.iter().map(ConceptId::as_str).collect();
            writeln!(f, "C\t{}\t{}\t{}", c.id, c.labels.join("|"), parents.join(","))?;
        }
        for r in &self.resources {
            writeln!(f, "R\t{}\t{}\t{}", r.id, r.title, r.concept)?;
        }
        for p in &self.properties {
            writeln!(f, "P\t{}\t{}\t{}", p.subject, p.property, p.target)?;
        }
        for k in &self.categories {
            writeln!(f, "K\t{}\t{}", k.resource, k.category)?;
        }
        Ok(())
    }
}
