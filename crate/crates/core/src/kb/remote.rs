//! SPARQL-over-HTTP client with the same query contract as the offline store.
//!
//! Concept ids are category IRIs, resource ids are resource IRIs. The
//! vocabulary follows the DBpedia layout: `skos:broader` for parent edges,
//! `dct:subject` for resource categories, `rdfs:label` for titles and labels.
//! Related-resource expansion follows object properties in the DBpedia
//! ontology namespace only.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde_json::Value;

use super::{normalize_title, ConceptId, KbError, KnowledgeBase, QueryStats, Resource, ResourceId};

pub const ENDPOINT_VAR: &str = "TAXSAN_KB_ENDPOINT";

const PREFIXES: &str = "PREFIX skos: <http://www.w3.org/2004/02/skos/core#>\n\
PREFIX dct: <http://purl.org/dc/terms/>\n\
PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>\n";

const ONTOLOGY_NS: &str = "http://dbpedia.org/ontology/";

pub struct SparqlKb {
    endpoint: String,
    agent: ureq::Agent,
    /// Maximum number of resources a title lookup may return.
    pub lookup_limit: usize,
    lookups: AtomicU64,
    branches: AtomicU64,
}

impl std::fmt::Debug for SparqlKb {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparqlKb").field("endpoint", &self.endpoint).finish()
    }
}

fn iri(id: &str) -> Result<String, KbError> {
    if id.is_empty() || id.chars().any(|c| c.is_whitespace() || "<>\"{}|^`\\".contains(c)) {
        return Err(KbError::Remote(format!("`{id}` is not a usable IRI")));
    }
    Ok(format!("<{id}>"))
}

fn literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn local_name(iri: &str) -> String {
    let tail = iri.rsplit(['/', '#']).next().unwrap_or(iri);
    let tail = tail.strip_prefix("Category:").unwrap_or(tail);
    tail.replace('_', " ")
}

/// Rows of a SPARQL JSON result, each a map from variable to value.
fn bindings(body: &str) -> Result<Vec<BTreeMap<String, String>>, KbError> {
    let doc: Value =
        serde_json::from_str(body).map_err(|e| KbError::Remote(format!("bad result document: {e}")))?;
    let rows = doc
        .pointer("/results/bindings")
        .and_then(Value::as_array)
        .ok_or_else(|| KbError::Remote("result document has no bindings".into()))?;
    Ok(rows
        .iter()
        .filter_map(Value::as_object)
        .map(|row| {
            row.iter()
                .filter_map(|(k, v)| Some((k.clone(), v.get("value")?.as_str()?.to_owned())))
                .collect()
        })
        .collect())
}

impl SparqlKb {
    pub fn new(endpoint: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        Self {
            endpoint: endpoint.into(),
            agent,
            lookup_limit: 200,
            lookups: AtomicU64::new(0),
            branches: AtomicU64::new(0),
        }
    }

    /// Reads the endpoint URL from `TAXSAN_KB_ENDPOINT`.
    pub fn from_env() -> Result<Self, KbError> {
        std::env::var(ENDPOINT_VAR)
            .map(Self::new)
            .map_err(|_| KbError::Remote(format!("{ENDPOINT_VAR} is not set")))
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn run(&self, query: &str) -> Result<String, KbError> {
        let full = format!("{PREFIXES}{query}");
        let mut resp = self
            .agent
            .get(&self.endpoint)
            .query("query", &full)
            .header("Accept", "application/sparql-results+json")
            .call()
            .map_err(|e| KbError::Remote(e.to_string()))?;
        resp.body_mut()
            .read_to_string()
            .map_err(|e| KbError::Remote(e.to_string()))
    }

    fn select(&self, query: &str) -> Result<Vec<BTreeMap<String, String>>, KbError> {
        bindings(&self.run(query)?)
    }

    fn column(&self, query: &str, var: &str) -> Result<BTreeSet<ConceptId>, KbError> {
        Ok(self
            .select(query)?
            .into_iter()
            .filter_map(|mut row| row.remove(var))
            .map(ConceptId)
            .collect())
    }

    fn require(&self, concept: &ConceptId) -> Result<String, KbError> {
        let c = iri(concept.as_str())?;
        let body = self.run(&format!(
            "ASK {{ {{ {c} ?p ?o }} UNION {{ ?s ?p {c} }} }}"
        ))?;
        let doc: Value = serde_json::from_str(&body).map_err(|e| KbError::Remote(e.to_string()))?;
        if doc.get("boolean").and_then(Value::as_bool) == Some(true) {
            Ok(c)
        } else {
            Err(KbError::UnknownConcept(concept.clone()))
        }
    }

    fn values(resources: &[Resource]) -> Result<String, KbError> {
        let iris: Result<Vec<String>, KbError> = resources.iter().map(|r| iri(r.id.as_str())).collect();
        Ok(iris?.join(" "))
    }
}

impl KnowledgeBase for SparqlKb {
    fn ancestors(&self, concept: &ConceptId, strict: bool) -> Result<BTreeSet<ConceptId>, KbError> {
        let c = self.require(concept)?;
        let mut set = self.column(&format!("SELECT DISTINCT ?a WHERE {{ {c} skos:broader+ ?a }}"), "a")?;
        if strict {
            set.remove(concept);
        } else {
            set.insert(concept.clone());
        }
        Ok(set)
    }

    fn branch(&self, root: &ConceptId) -> Result<BTreeSet<ConceptId>, KbError> {
        let c = self.require(root)?;
        self.branches.fetch_add(1, Ordering::Relaxed);
        let mut set = self.column(&format!("SELECT DISTINCT ?d WHERE {{ ?d skos:broader+ {c} }}"), "d")?;
        set.remove(root);
        Ok(set)
    }

    fn parents(&self, concept: &ConceptId) -> Result<Vec<ConceptId>, KbError> {
        let c = self.require(concept)?;
        Ok(self
            .column(&format!("SELECT DISTINCT ?p WHERE {{ {c} skos:broader ?p }}"), "p")?
            .into_iter()
            .collect())
    }

    fn lookup_resources(&self, phrase: &str) -> Result<Vec<Resource>, KbError> {
        self.lookups.fetch_add(1, Ordering::Relaxed);
        let needle = normalize_title(phrase);
        if needle.is_empty() {
            return Ok(Vec::new());
        }
        let rows = self.select(&format!(
            "SELECT DISTINCT ?r ?title ?c WHERE {{ ?r rdfs:label ?title . \
             FILTER(langMatches(lang(?title), \"en\")) \
             FILTER(CONTAINS(LCASE(REPLACE(STR(?title), \"_\", \" \")), {})) \
             OPTIONAL {{ ?r dct:subject ?c }} }} ORDER BY ?r LIMIT {}",
            literal(&needle),
            self.lookup_limit
        ))?;
        let mut by_id: BTreeMap<String, Resource> = BTreeMap::new();
        for row in rows {
            let (Some(r), Some(title)) = (row.get("r"), row.get("title")) else {
                continue;
            };
            if !normalize_title(title).contains(&needle) {
                continue;
            }
            let entry = by_id.entry(r.clone()).or_insert_with(|| Resource {
                id: ResourceId(r.clone()),
                title: title.clone(),
                concept: ConceptId(r.clone()),
                properties: Vec::new(),
                categories: Vec::new(),
            });
            if let Some(c) = row.get("c") {
                let c = ConceptId(c.clone());
                if !entry.categories.contains(&c) {
                    entry.categories.push(c);
                }
            }
        }
        Ok(by_id.into_values().collect())
    }

    fn expand_related(&self, resources: &[Resource]) -> Result<Vec<Resource>, KbError> {
        let mut out: Vec<Resource> = Vec::new();
        for r in resources {
            if !out.iter().any(|o| o.id == r.id) {
                out.push(r.clone());
            }
        }
        if out.is_empty() {
            return Ok(out);
        }
        let rows = self.select(&format!(
            "SELECT ?r ?p ?t ?tl WHERE {{ VALUES ?r {{ {} }} ?r ?p ?t . ?t rdfs:label ?tl . \
             FILTER(isIRI(?t) && STRSTARTS(STR(?p), {})) FILTER(langMatches(lang(?tl), \"en\")) }}",
            Self::values(&out)?,
            literal(ONTOLOGY_NS)
        ))?;
        let inputs = out.len();
        for row in rows {
            let (Some(r), Some(p), Some(t), Some(tl)) = (row.get("r"), row.get("p"), row.get("t"), row.get("tl"))
            else {
                continue;
            };
            if let Some(src) = out[..inputs].iter_mut().find(|o| o.id.as_str() == r) {
                src.properties.push((local_name(p), ResourceId(t.clone())));
            }
            if !out.iter().any(|o| o.id.as_str() == t) {
                out.push(Resource {
                    id: ResourceId(t.clone()),
                    title: tl.clone(),
                    concept: ConceptId(t.clone()),
                    properties: Vec::new(),
                    categories: Vec::new(),
                });
            }
        }
        Ok(out)
    }

    fn categories_of(&self, resources: &[Resource]) -> Result<Vec<ConceptId>, KbError> {
        if resources.is_empty() {
            return Ok(Vec::new());
        }
        let rows = self.select(&format!(
            "SELECT ?r ?c WHERE {{ VALUES ?r {{ {} }} ?r dct:subject ?c }}",
            Self::values(resources)?
        ))?;
        let mut out = Vec::new();
        for r in resources {
            let mut found: Vec<&String> = rows
                .iter()
                .filter(|row| row.get("r").map(String::as_str) == Some(r.id.as_str()))
                .filter_map(|row| row.get("c"))
                .collect();
            found.sort();
            for c in found {
                let c = ConceptId(c.clone());
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        }
        Ok(out)
    }

    fn label(&self, concept: &ConceptId) -> Result<String, KbError> {
        let c = iri(concept.as_str())?;
        let rows = self.select(&format!(
            "SELECT ?l WHERE {{ {c} rdfs:label ?l FILTER(langMatches(lang(?l), \"en\")) }} LIMIT 1"
        ))?;
        Ok(rows
            .into_iter()
            .find_map(|mut row| row.remove("l"))
            .unwrap_or_else(|| local_name(concept.as_str())))
    }

    fn concepts_labelled(&self, label: &str) -> Result<Vec<ConceptId>, KbError> {
        let wanted = label.trim().to_lowercase();
        Ok(self
            .column(
                &format!(
                    "SELECT DISTINCT ?c WHERE {{ ?c a skos:Concept ; rdfs:label ?l . \
                     FILTER(LCASE(STR(?l)) = {}) }}",
                    literal(&wanted)
                ),
                "c",
            )?
            .into_iter()
            .collect())
    }

    fn contains(&self, concept: &ConceptId) -> bool {
        self.require(concept).is_ok()
    }

    fn stats(&self) -> QueryStats {
        QueryStats {
            lookups: self.lookups.load(Ordering::Relaxed),
            branches: self.branches.load(Ordering::Relaxed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Write};
    use std::net::TcpListener;

    /// Serves `count` requests, answering each with the body chosen by
    /// `respond` from the decoded request line.
    fn serve(count: usize, respond: fn(&str) -> String) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            for stream in listener.incoming().take(count) {
                let mut stream = stream.unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut request_line = String::new();
                reader.read_line(&mut request_line).unwrap();
                loop {
                    let mut h = String::new();
                    reader.read_line(&mut h).unwrap();
                    if h == "\r\n" || h.is_empty() {
                        break;
                    }
                }
                let body = respond(&decode(&request_line));
                write!(
                    stream,
                    "HTTP/1.1 200 OK\r\nContent-Type: application/sparql-results+json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                    body.len(),
                    body
                )
                .unwrap();
            }
        });
        format!("http://{addr}/sparql")
    }

    fn decode(s: &str) -> String {
        let bytes = s.as_bytes();
        let mut out = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] {
                b'%' if i + 2 < bytes.len() => {
                    let hex = std::str::from_utf8(&bytes[i + 1..i + 3]).unwrap();
                    out.push(u8::from_str_radix(hex, 16).unwrap());
                    i += 3;
                }
                b'+' => {
                    out.push(b' ');
                    i += 1;
                }
                b => {
                    out.push(b);
                    i += 1;
                }
            }
        }
        String::from_utf8(out).unwrap()
    }

    fn rows(var: &str, values: &[&str]) -> String {
        let items: Vec<String> = values
            .iter()
            .map(|v| format!(r#"{{"{var}":{{"type":"uri","value":"{v}"}}}}"#))
            .collect();
        format!(r#"{{"head":{{"vars":["{var}"]}},"results":{{"bindings":[{}]}}}}"#, items.join(","))
    }

    #[test]
    fn ancestors_over_http() {
        let url = serve(2, |q| {
            if q.contains("ASK") {
                r#"{"head":{},"boolean":true}"#.to_owned()
            } else {
                assert!(q.contains("skos:broader+"));
                rows("a", &["http://x/C_d", "http://x/C_b"])
            }
        });
        let kb = SparqlKb::new(url);
        let got = kb.ancestors(&"http://x/C_a".into(), false).unwrap();
        let want: BTreeSet<ConceptId> = ["http://x/C_a", "http://x/C_b", "http://x/C_d"]
            .into_iter()
            .map(ConceptId::from)
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn lookup_counts_one_query_and_filters_titles() {
        let url = serve(1, |q| {
            assert!(q.contains("\"apple\""), "{q}");
            r#"{"results":{"bindings":[
                {"r":{"value":"http://x/Apple"},"title":{"value":"Apple"},"c":{"value":"http://x/C_Apples"}},
                {"r":{"value":"http://x/Apple"},"title":{"value":"Apple"},"c":{"value":"http://x/C_Malus"}},
                {"r":{"value":"http://x/Pear"},"title":{"value":"Pear"}}
            ]}}"#
                .to_owned()
        });
        let kb = SparqlKb::new(url);
        let found = kb.lookup_resources("Apple").unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].categories.len(), 2);
        assert_eq!(kb.stats().lookups, 1);
    }

    #[test]
    fn unknown_concept_and_bad_ids() {
        let url = serve(1, |_| r#"{"head":{},"boolean":false}"#.to_owned());
        let kb = SparqlKb::new(url);
        assert!(matches!(kb.branch(&"http://x/none".into()), Err(KbError::UnknownConcept(_))));
        assert!(matches!(kb.parents(&"has space".into()), Err(KbError::Remote(_))));
    }

    #[test]
    fn unreachable_endpoint_is_remote_error() {
        let kb = SparqlKb::new("http://127.0.0.1:9/sparql");
        assert!(matches!(kb.lookup_resources("x"), Err(KbError::Remote(_))));
    }

    #[test]
    fn literal_escaping() {
        assert_eq!(literal("a\"b\\c"), r#""a\"b\\c""#);
        assert_eq!(local_name("http://dbpedia.org/resource/Category:Liver_diseases"), "Liver diseases");
    }
}
