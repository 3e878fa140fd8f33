use std::collections::BTreeSet;

use crate::kb::{ConceptId, KbError, KnowledgeBase};

/// A candidate sense with its self-inclusive ancestor set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SenseCandidate {
    pub concept: ConceptId,
    pub ancestors: BTreeSet<ConceptId>,
}

impl SenseCandidate {
    pub fn new<K: KnowledgeBase + ?Sized>(kb: &K, concept: ConceptId) -> Result<Self, KbError> {
        let ancestors = kb.ancestors(&concept, false)?;
        Ok(Self { concept, ancestors })
    }
}

/// `log2(1 + |A ∪ B − A ∩ B| / |A ∪ B|)` over the two ancestor sets.
///
/// Symmetric, in `[0, 1]`, and zero exactly when the sets coincide.
///
/// # Panics
///
/// When both sets are empty, which self-inclusive closures never are.
pub fn semantic_distance(a: &SenseCandidate, b: &SenseCandidate) -> f64 {
    set_distance(&a.ancestors, &b.ancestors)
}

pub fn set_distance(a: &BTreeSet<ConceptId>, b: &BTreeSet<ConceptId>) -> f64 {
    let common = a.intersection(b).count();
    let union = a.len() + b.len() - common;
    assert!(union > 0, "distance between two empty ancestor sets");
    let diff = union - common;
    (1.0 + diff as f64 / union as f64).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[&str]) -> BTreeSet<ConceptId> {
        v.iter().map(|s| ConceptId::from(*s)).collect()
    }

    #[test]
    fn hand_values() {
        let d = set_distance(&set(&["r", "x", "a"]), &set(&["r", "x", "b"]));
        assert!((d - 1.5f64.log2()).abs() < 1e-12);
        assert!((d - 0.585).abs() < 5e-4);
        assert_eq!(set_distance(&set(&["a", "b"]), &set(&["b", "a"])), 0.0);
        assert_eq!(set_distance(&set(&["a"]), &set(&["b"])), 1.0);
    }

    #[test]
    #[should_panic]
    fn empty_sets_violate_contract() {
        set_distance(&BTreeSet::new(), &BTreeSet::new());
    }
}
