use std::collections::HashSet;
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{AccessLevel, PolicyError, PrivacyRule, RuleSet, TopicCatalog, TopicScope, STRANGERS};

/// A publisher's declarative privacy settings.
///
/// ```json
/// {"publisher": "bob",
///  "categories": ["close friends", "family friends"],
///  "topics": [{"st": "medical health",
///              "levels": {"close friends": "diseases", "family friends": "hepatitis"}}]}
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requirements {
    pub publisher: String,
    #[serde(default)]
    pub categories: Vec<String>,
    #[serde(default)]
    pub topics: Vec<TopicRequirement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicRequirement {
    pub st: String,
    /// `(category, level)` in file order; repeated keys are kept so that
    /// compilation can report them.
    #[serde(deserialize_with = "ordered_levels", serialize_with = "levels_as_map", default)]
    pub levels: Vec<(String, Option<String>)>,
}

fn ordered_levels<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(String, Option<String>)>, D::Error> {
    struct Ordered;
    impl<'de> Visitor<'de> for Ordered {
        type Value = Vec<(String, Option<String>)>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a map from contact category to access level or null")
        }

        fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
            let mut out = Vec::new();
            while let Some((k, v)) = map.next_entry::<String, Option<String>>()? {
                out.push((k, v));
            }
            Ok(out)
        }
    }
    d.deserialize_map(Ordered)
}

fn levels_as_map<S: Serializer>(levels: &[(String, Option<String>)], s: S) -> Result<S::Ok, S::Error> {
    let mut m = s.serialize_map(Some(levels.len()))?;
    for (k, v) in levels {
        m.serialize_entry(k, v)?;
    }
    m.end()
}

impl Requirements {
    pub fn from_json(text: &str) -> Result<Self, PolicyError> {
        serde_json::from_str(text).map_err(|e| PolicyError::Parse(e.to_string()))
    }
}

/// Turns requirements into rules.
///
/// Every stated `(topic, category)` pair becomes a rule. Declared categories
/// a stated topic leaves out get an explicit NULL rule; with no topics at
/// all, every catalog topic gets NULL rules for every declared category.
pub fn compile_requirements(req: &Requirements, catalog: &TopicCatalog) -> Result<RuleSet, PolicyError> {
    let mut categories: Vec<String> = Vec::new();
    for c in &req.categories {
        let c = c.trim();
        if !c.is_empty() && !categories.iter().any(|x| x == c) {
            categories.push(c.to_owned());
        }
    }
    let mut rules = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut stated_topics: Vec<String> = Vec::new();

    for t in &req.topics {
        let topic = catalog.get(&t.st).ok_or_else(|| PolicyError::UnknownTopic(t.st.clone()))?;
        if !stated_topics.contains(&topic.name) {
            stated_topics.push(topic.name.clone());
        }
        for (cc, al) in &t.levels {
            let cc = cc.trim();
            if cc != STRANGERS && !categories.iter().any(|c| c == cc) {
                return Err(PolicyError::UnknownCategory {
                    publisher: req.publisher.clone(),
                    category: cc.to_owned(),
                });
            }
            if !seen.insert((topic.name.clone(), cc.to_owned())) {
                return Err(PolicyError::DuplicateRule {
                    st: topic.name.clone(),
                    cc: cc.to_owned(),
                });
            }
            if let (TopicScope::Entity(category), Some(label)) = (&topic.scope, al) {
                if AccessLevel::entity_level(*category, label).is_none() {
                    return Err(PolicyError::InvalidEntityLevel {
                        topic: topic.name.clone(),
                        label: label.clone(),
                    });
                }
            }
            rules.push(PrivacyRule {
                st: topic.name.clone(),
                cc: cc.to_owned(),
                al: al.as_ref().map(|s| s.trim().to_owned()),
            });
        }
    }

    let fill: Vec<String> = if req.topics.is_empty() {
        catalog.iter().map(|t| t.name.clone()).collect()
    } else {
        stated_topics
    };
    for st in fill {
        for cc in &categories {
            if seen.insert((st.clone(), cc.clone())) {
                rules.push(PrivacyRule {
                    st: st.clone(),
                    cc: cc.clone(),
                    al: None,
                });
            }
        }
    }

    Ok(RuleSet {
        publisher: req.publisher.clone(),
        categories,
        rules,
    })
}
