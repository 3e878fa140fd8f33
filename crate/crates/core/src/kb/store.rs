use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use super::snapshot::{self, Snapshot};
use super::{normalize_title, Concept, ConceptId, KbError, KnowledgeBase, Resource, ResourceId};

/// Counters of the queries a knowledge base has answered.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    /// `lookup_resources` calls (one per noun-phrase key).
    pub lookups: u64,
    /// `branch` calls.
    pub branches: u64,
}

/// Immutable, in-memory taxonomy loaded from a snapshot.
///
/// Only the query counters change after construction; they are atomics so the
/// store can be shared across threads behind a plain reference.
#[derive(Debug)]
pub struct TaxonomyStore {
    concepts: Vec<Concept>,
    concept_index: HashMap<ConceptId, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    label_index: HashMap<String, Vec<usize>>,
    resources: Vec<Resource>,
    resource_index: HashMap<ResourceId, usize>,
    /// Normalized titles, parallel to `resources`.
    titles: Vec<String>,
    lookups: AtomicU64,
    branches: AtomicU64,
}

impl TaxonomyStore {
    pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Self, KbError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| KbError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_snapshot_str(&text)
    }

    pub fn from_snapshot_str(text: &str) -> Result<Self, KbError> {
        Self::from_snapshot(snapshot::parse(text)?)
    }

    pub fn from_snapshot(snap: Snapshot) -> Result<Self, KbError> {
        let mut concept_index = HashMap::with_capacity(snap.concepts.len());
        for (i, c) in snap.concepts.iter().enumerate() {
            if concept_index.insert(c.id.clone(), i).is_some() {
                return Err(KbError::Parse {
                    line: c.line,
                    message: format!("duplicate concept `{}`", c.id),
                });
            }
        }

        let mut parents = vec![Vec::new(); snap.concepts.len()];
        let mut children = vec![Vec::new(); snap.concepts.len()];
        for (i, c) in snap.concepts.iter().enumerate() {
            for p in &c.parents {
                let Some(&pi) = concept_index.get(p) else {
                    return Err(KbError::Integrity {
                        line: c.line,
                        message: format!("concept `{}` has unknown parent `{p}`", c.id),
                    });
                };
                if !parents[i].contains(&pi) {
                    parents[i].push(pi);
                    children[pi].push(i);
                }
            }
        }
        if let Some(on_cycle) = find_cycle(&parents) {
            return Err(KbError::Cycle {
                concept: snap.concepts[on_cycle].id.clone(),
            });
        }

        let mut label_index: HashMap<String, Vec<usize>> = HashMap::new();
        let concepts: Vec<Concept> = snap
            .concepts
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                let mut labels = c.labels.into_iter();
                let label = labels.next().expect("parser guarantees a label");
                let aliases: Vec<String> = labels.collect();
                for l in std::iter::once(&label).chain(&aliases) {
                    let slot = label_index.entry(l.to_lowercase()).or_default();
                    if !slot.contains(&i) {
                        slot.push(i);
                    }
                }
                Concept {
                    id: c.id,
                    label,
                    aliases,
                    parents: c.parents,
                }
            })
            .collect();
        for slot in label_index.values_mut() {
            slot.sort_by(|&a, &b| concepts[a].id.cmp(&concepts[b].id));
        }

        let mut resources: Vec<Resource> = Vec::with_capacity(snap.resources.len());
        let mut resource_index = HashMap::with_capacity(snap.resources.len());
        for r in snap.resources {
            if !concept_index.contains_key(&r.concept) {
                return Err(KbError::Integrity {
                    line: r.line,
                    message: format!("resource `{}` denotes unknown concept `{}`", r.id, r.concept),
                });
            }
            if resource_index.insert(r.id.clone(), resources.len()).is_some() {
                return Err(KbError::Parse {
                    line: r.line,
                    message: format!("duplicate resource `{}`", r.id),
                });
            }
            resources.push(Resource {
                id: r.id,
                title: r.title,
                concept: r.concept,
                properties: Vec::new(),
                categories: Vec::new(),
            });
        }
        for p in snap.properties {
            let Some(&si) = resource_index.get(&p.subject) else {
                return Err(KbError::Integrity {
                    line: p.line,
                    message: format!("property subject `{}` is not a resource", p.subject),
                });
            };
            if !resource_index.contains_key(&p.target) {
                return Err(KbError::Integrity {
                    line: p.line,
                    message: format!("property target `{}` is not a resource", p.target),
                });
            }
            resources[si].properties.push((p.property, p.target));
        }
        for k in snap.categories {
            let Some(&ri) = resource_index.get(&k.resource) else {
                return Err(KbError::Integrity {
                    line: k.line,
                    message: format!("category subject `{}` is not a resource", k.resource),
                });
            };
            if !concept_index.contains_key(&k.category) {
                return Err(KbError::Integrity {
                    line: k.line,
                    message: format!("category `{}` is not a concept", k.category),
                });
            }
            if !resources[ri].categories.contains(&k.category) {
                resources[ri].categories.push(k.category);
            }
        }

        // Lookups report resources in id order.
        let mut order: Vec<usize> = (0..resources.len()).collect();
        order.sort_by(|&a, &b| resources[a].id.cmp(&resources[b].id));
        let mut slots: Vec<Option<Resource>> = resources.into_iter().map(Some).collect();
        let resources: Vec<Resource> = order
            .into_iter()
            .map(|i| slots[i].take().expect("each index used once"))
            .collect();
        let resource_index = resources
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.clone(), i))
            .collect();
        let titles = resources.iter().map(|r| normalize_title(&r.title)).collect();

        Ok(Self {
            concepts,
            concept_index,
            parents,
            children,
            label_index,
            resources,
            resource_index,
            titles,
            lookups: AtomicU64::new(0),
            branches: AtomicU64::new(0),
        })
    }

    pub fn concept(&self, id: &ConceptId) -> Option<&Concept> {
        self.concept_index.get(id).map(|&i| &self.concepts[i])
    }

    pub fn resource(&self, id: &ResourceId) -> Option<&Resource> {
        self.resource_index.get(id).map(|&i| &self.resources[i])
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.iter()
    }

    pub fn resources(&self) -> impl Iterator<Item = &Resource> {
        self.resources.iter()
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    fn index_of(&self, id: &ConceptId) -> Result<usize, KbError> {
        self.concept_index
            .get(id)
            .copied()
            .ok_or_else(|| KbError::UnknownConcept(id.clone()))
    }

    fn closure(&self, start: usize, edges: &[Vec<usize>]) -> HashSet<usize> {
        let mut seen = HashSet::new();
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            for &next in &edges[n] {
                if seen.insert(next) {
                    stack.push(next);
                }
            }
        }
        seen
    }

    fn ids(&self, idx: impl IntoIterator<Item = usize>) -> BTreeSet<ConceptId> {
        idx.into_iter().map(|i| self.concepts[i].id.clone()).collect()
    }

    /// Length of the shortest upward path from `from` to `to`, if `to` is an
    /// ancestor (or `from` itself).
    pub fn upward_distance(&self, from: &ConceptId, to: &ConceptId) -> Result<Option<usize>, KbError> {
        let start = self.index_of(from)?;
        let goal = self.index_of(to)?;
        let mut dist = HashMap::from([(start, 0usize)]);
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            if n == goal {
                return Ok(Some(dist[&n]));
            }
            for &p in &self.parents[n] {
                if !dist.contains_key(&p) {
                    dist.insert(p, dist[&n] + 1);
                    queue.push_back(p);
                }
            }
        }
        Ok(None)
    }
}

/// Returns a node that lies on a cycle of the parent graph, if any.
fn find_cycle(parents: &[Vec<usize>]) -> Option<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut mark = vec![Mark::New; parents.len()];
    for root in 0..parents.len() {
        if mark[root] != Mark::New {
            continue;
        }
        // (node, next parent slot to visit)
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Active;
        while let Some(&mut (node, ref mut slot)) = stack.last_mut() {
            if let Some(&p) = parents[node].get(*slot) {
                *slot += 1;
                match mark[p] {
                    Mark::Active => return Some(p),
                    Mark::New => {
                        mark[p] = Mark::Active;
                        stack.push((p, 0));
                    }
                    Mark::Done => {}
                }
            } else {
                mark[node] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

impl KnowledgeBase for TaxonomyStore {
    fn ancestors(&self, concept: &ConceptId, strict: bool) -> Result<BTreeSet<ConceptId>, KbError> {
        let i = self.index_of(concept)?;
        let mut set = self.closure(i, &self.parents);
        if !strict {
            set.insert(i);
        }
        Ok(self.ids(set))
    }

    fn branch(&self, root: &ConceptId) -> Result<BTreeSet<ConceptId>, KbError> {
        let i = self.index_of(root)?;
        self.branches.fetch_add(1, Ordering::Relaxed);
        Ok(self.ids(self.closure(i, &self.children)))
    }

    fn parents(&self, concept: &ConceptId) -> Result<Vec<ConceptId>, KbError> {
        let i = self.index_of(concept)?;
        Ok(self.parents[i].iter().map(|&p| self.concepts[p].id.clone()).collect())
    }

    fn lookup_resources(&self, phrase: &str) -> Result<Vec<Resource>, KbError> {
        self.lookups.fetch_add(1, Ordering::Relaxed);
        let needle = normalize_title(phrase);
        if needle.is_empty() {
            return Ok(Vec::new());
        }
        Ok(self
            .titles
            .iter()
            .zip(&self.resources)
            .filter(|(title, _)| title.contains(&needle))
            .map(|(_, r)| r.clone())
            .collect())
    }

    fn expand_related(&self, resources: &[Resource]) -> Result<Vec<Resource>, KbError> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for r in resources {
            if self.resource(&r.id).is_none() {
                return Err(KbError::UnknownResource(r.id.clone()));
            }
            if seen.insert(r.id.clone()) {
                out.push(r.clone());
            }
        }
        for r in resources {
            for (_, target) in &r.properties {
                if seen.insert(target.clone()) {
                    let t = self
                        .resource(target)
                        .ok_or_else(|| KbError::UnknownResource(target.clone()))?;
                    out.push(t.clone());
                }
            }
        }
        Ok(out)
    }

    fn categories_of(&self, resources: &[Resource]) -> Result<Vec<ConceptId>, KbError> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for r in resources {
            let stored = self
                .resource(&r.id)
                .ok_or_else(|| KbError::UnknownResource(r.id.clone()))?;
            for c in &stored.categories {
                if seen.insert(c.clone()) {
                    out.push(c.clone());
                }
            }
        }
        Ok(out)
    }

    fn label(&self, concept: &ConceptId) -> Result<String, KbError> {
        Ok(self.concepts[self.index_of(concept)?].label.clone())
    }

    fn concepts_labelled(&self, label: &str) -> Result<Vec<ConceptId>, KbError> {
        Ok(self
            .label_index
            .get(&label.trim().to_lowercase())
            .map(|v| v.iter().map(|&i| self.concepts[i].id.clone()).collect())
            .unwrap_or_default())
    }

    fn contains(&self, concept: &ConceptId) -> bool {
        self.concept_index.contains_key(concept)
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

    const DIAMOND: &str = "# taxsnap v1\nC\td\td\t\nC\tb\tb\td\nC\tc\tc\td\nC\ta\ta\tb,c\n";

    fn ids(v: &[&str]) -> BTreeSet<ConceptId> {
        v.iter().map(|s| ConceptId::from(*s)).collect()
    }

    #[test]
    fn diamond_closures() {
        let kb = TaxonomyStore::from_snapshot_str(DIAMOND).unwrap();
        assert_eq!(kb.ancestors(&"a".into(), false).unwrap(), ids(&["a", "b", "c", "d"]));
        assert_eq!(kb.ancestors(&"a".into(), true).unwrap(), ids(&["b", "c", "d"]));
        assert_eq!(kb.ancestors(&"d".into(), true).unwrap(), ids(&[]));
        assert_eq!(kb.branch(&"d".into()).unwrap(), ids(&["a", "b", "c"]));
        assert_eq!(kb.branch(&"a".into()).unwrap(), ids(&[]));
        assert_eq!(kb.upward_distance(&"a".into(), &"d".into()).unwrap(), Some(2));
        assert_eq!(kb.upward_distance(&"d".into(), &"a".into()).unwrap(), None);
    }

    #[test]
    fn unknown_concept_is_not_found() {
        let kb = TaxonomyStore::from_snapshot_str(DIAMOND).unwrap();
        assert!(matches!(kb.ancestors(&"zz".into(), false), Err(KbError::UnknownConcept(_))));
        assert!(matches!(kb.branch(&"zz".into()), Err(KbError::UnknownConcept(_))));
    }

    #[test]
    fn dangling_parent_is_integrity_error() {
        let err = TaxonomyStore::from_snapshot_str("# taxsnap v1\nC\ta\ta\tghost\n").unwrap_err();
        assert!(matches!(err, KbError::Integrity { line: 2, .. }), "{err}");
    }

    #[test]
    fn dangling_resource_references() {
        let base = "# taxsnap v1\nC\ta\ta\t\nR\tr\tR\ta\n";
        for bad in ["R\ts\tS\tnope\n", "P\tr\tp\tnope\n", "K\tr\tnope\n", "K\tnope\ta\n"] {
            let err = TaxonomyStore::from_snapshot_str(&format!("{base}{bad}")).unwrap_err();
            assert!(matches!(err, KbError::Integrity { line: 4, .. }), "{bad}: {err}");
        }
    }

    #[test]
    fn cycle_names_a_concept_on_it() {
        let text = "# taxsnap v1\nC\tleaf\tleaf\tx\nC\tx\tx\ty\nC\ty\ty\tz\nC\tz\tz\tx\n";
        match TaxonomyStore::from_snapshot_str(text).unwrap_err() {
            KbError::Cycle { concept } => assert!(["x", "y", "z"].contains(&concept.as_str())),
            other => panic!("unexpected {other:?}"),
        }
        let selfloop = "# taxsnap v1\nC\tx\tx\tx\n";
        assert!(matches!(
            TaxonomyStore::from_snapshot_str(selfloop),
            Err(KbError::Cycle { .. })
        ));
    }

    #[test]
    fn empty_store_answers_empty() {
        let kb = TaxonomyStore::from_snapshot_str("# taxsnap v1\n").unwrap();
        assert!(kb.is_empty());
        assert!(kb.lookup_resources("anything").unwrap().is_empty());
        assert!(kb.concepts_labelled("x").unwrap().is_empty());
        assert_eq!(kb.stats().lookups, 1);
    }

    #[test]
    fn lookup_counts_once_per_call() {
        let kb = TaxonomyStore::from_snapshot_str(
            "# taxsnap v1\nC\tc\tc\t\nR\ta\tApple\tc\nR\tb\tApple_inc\tc\nR\tx\tPear\tc\n",
        )
        .unwrap();
        assert_eq!(kb.lookup_resources("APPLE").unwrap().len(), 2);
        assert_eq!(kb.lookup_resources("apple  inc").unwrap().len(), 1);
        assert!(kb.lookup_resources("banana").unwrap().is_empty());
        assert_eq!(kb.stats().lookups, 3);
    }

    #[test]
    fn labels_and_aliases_resolve_case_insensitively() {
        let kb = TaxonomyStore::from_snapshot_str(
            "# taxsnap v1\nC\tr\troot\t\nC\tb\tinfectious disease|Infections\tr\nC\ta\tinfection|Infections\tr\n",
        )
        .unwrap();
        assert_eq!(kb.concepts_labelled("infections").unwrap(), [ConceptId::from("a"), ConceptId::from("b")]);
        assert_eq!(kb.concepts_labelled(" Infection ").unwrap(), [ConceptId::from("a")]);
        assert_eq!(kb.label(&"b".into()).unwrap(), "infectious disease");
    }
}
