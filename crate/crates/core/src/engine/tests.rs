use super::*;
use crate::annotate::{Annotator, RawMessage};
use crate::kb::TaxonomyStore;
use crate::nlp::EntityCategory;
use crate::policy::PrivacyRule;

const FIG6: &str = "Dealing with Hiv and then being told that you suffer from AIDS is almost the hardest thing to face with in life. The hardest thing is dealing with the virus because there are people that just do not understand and think that you are a leper.";

fn fig10() -> TaxonomyStore {
    TaxonomyStore::from_snapshot_str(include_str!("../../fixtures/fig10.taxsnap")).unwrap()
}

fn concept(label: &str, kb: &TaxonomyStore) -> AccessLevel {
    let catalog = TopicCatalog::default();
    AccessLevel::resolve(catalog.get("medical health").unwrap(), Some(label), kb).unwrap()
}

fn medical(level: AccessLevel) -> EffectiveLevels {
    let catalog = TopicCatalog::default();
    EffectiveLevels::new().with(catalog.get("medical health").unwrap().clone(), level)
}

fn annotate(kb: &TaxonomyStore, id: &str, publisher: &str, text: &str) -> AnnotatedMessage {
    Annotator::english().annotate(&RawMessage::new(id, publisher, text), kb).unwrap()
}

#[test]
fn followers_see_infections() {
    let kb = fig10();
    let m = annotate(&kb, "m", "net", FIG6);
    let out = sanitize(&m, &medical(concept("Infections", &kb)), &kb).unwrap();
    assert_eq!(
        out.text,
        "Dealing with infection and then being told that you suffer from infectious disease is almost the hardest thing to face with in life. The hardest thing is dealing with the virus because there are people that just do not understand and think that you are a infectious disease."
    );
    let surfaces: Vec<&str> = out.substitutions.iter().map(|s| s.surface.as_str()).collect();
    assert_eq!(surfaces, ["Hiv", "AIDS", "leper"]);
    assert!(out.is_consistent_with(FIG6));
}

#[test]
fn registered_users_see_ill_health() {
    let kb = fig10();
    let m = annotate(&kb, "m", "net", FIG6);
    let out = sanitize(&m, &medical(concept("ill health", &kb)), &kb).unwrap();
    assert_eq!(
        out.text,
        "Dealing with ill health and then being told that you suffer from ill health is almost the hardest thing to face with in life. The hardest thing is dealing with the virus because there are people that just do not understand and think that you are a ill health."
    );
}

#[test]
fn level_node_itself_is_disclosed() {
    let kb = fig10();
    let m = annotate(&kb, "m", "net", FIG6);
    let out = sanitize(&m, &medical(concept("HIV/AIDS/Hepatitis/STDs", &kb)), &kb).unwrap();
    assert_eq!(out.text, FIG6);
    assert!(out.substitutions.is_empty());
}

#[test]
fn null_withholds_topic_senses_only() {
    let kb = fig10();
    let m = annotate(&kb, "m", "net", FIG6);
    let out = sanitize(&m, &medical(AccessLevel::Null), &kb).unwrap();
    let surfaces: Vec<&str> = out.substitutions.iter().map(|s| s.surface.as_str()).collect();
    assert_eq!(surfaces, ["Hiv", "AIDS", "leper"]);
    assert!(out.text.starts_with("Dealing with [withheld] and"));
    assert!(out.text.contains("the virus"));
}

#[test]
fn entity_levels() {
    let kb = fig10();
    let m = annotate(&kb, "m", "net", "Dr. Jane Smith said the test costs $40 on July 4, 2021.");
    let catalog = TopicCatalog::default();
    let person = catalog.get("NE_person").unwrap().clone();
    let money = catalog.get("NE_money").unwrap().clone();
    let levels = EffectiveLevels::new()
        .with(person.clone(), AccessLevel::NeCategory { category: EntityCategory::Person })
        .with(money, AccessLevel::Null);
    let out = sanitize(&m, &levels, &kb).unwrap();
    assert_eq!(out.text, "a person said the test costs [withheld] on July 4, 2021.");
    let names = EffectiveLevels::new().with(person, AccessLevel::NeName { category: EntityCategory::Person });
    assert_eq!(sanitize(&m, &names, &kb).unwrap().text, m.text);
}

#[test]
fn mismatched_entity_level_is_rejected() {
    let kb = fig10();
    let m = annotate(&kb, "m", "net", FIG6);
    let catalog = TopicCatalog::default();
    let levels = EffectiveLevels::new().with(
        catalog.get("NE_person").unwrap().clone(),
        AccessLevel::NeName { category: EntityCategory::Money },
    );
    assert!(sanitize(&m, &levels, &kb).is_err());
}

#[test]
fn membership_checks_are_bounded() {
    let kb = fig10();
    let m = annotate(&kb, "m", "net", FIG6);
    let a = assess_sensitivity(&m, &medical(concept("Infections", &kb)), &kb).unwrap();
    assert_eq!(a.stats.senses, 6);
    assert_eq!(a.stats.branch_queries, 2);
    assert!(a.stats.membership_checks <= a.stats.senses * a.stats.branch_size);
}

#[test]
fn sanitizing_twice_changes_nothing() {
    let kb = fig10();
    let m = annotate(&kb, "m", "net", FIG6);
    for label in ["Infections", "ill health", "disease"] {
        let levels = medical(concept(label, &kb));
        let once = sanitize(&m, &levels, &kb).unwrap();
        let again = reannotate(&m, &levels, &kb).unwrap();
        again.validate().unwrap();
        assert_eq!(again.text, once.text);
        let twice = sanitize(&again, &levels, &kb).unwrap();
        assert_eq!(twice.text, once.text, "{label}");
        assert!(twice.substitutions.is_empty());
    }
}

fn fig4_repo(kb: &TaxonomyStore, alice_to_bob: &str) -> MemoryRepository {
    let mut repo = MemoryRepository::new();
    let msg = Annotator::english()
        .annotate(
            &RawMessage::new("p1", "bob", "My hepatitis is back and the doctor is worried.").with_co_publishers(["ted"]),
            kb,
        )
        .unwrap();
    repo.add_message(msg);
    let rule = |st: &str, cc: &str, al: &str| PrivacyRule {
        st: st.into(),
        cc: cc.into(),
        al: Some(al.into()),
    };
    repo.add_rules(RuleSet {
        publisher: "bob".into(),
        categories: vec!["close friends".into()],
        rules: vec![
            rule("medical health", "strangers", "illness"),
            rule("medical health", "close friends", "disease"),
        ],
    });
    repo.add_rules(RuleSet {
        publisher: "ted".into(),
        categories: vec!["close friends".into()],
        rules: vec![rule("medical health", "close friends", "liver disease")],
    });
    if alice_to_bob != "strangers" {
        repo.contacts.insert("bob", "alice", alice_to_bob).unwrap();
    }
    repo.contacts.insert("ted", "alice", "close friends").unwrap();
    repo
}

#[test]
fn co_publisher_conflicts() {
    let kb = fig10();

    let repo = fig4_repo(&kb, "close friends");
    let monitor = Monitor::new(&kb, &repo);
    let msg = repo.annotated("p1").unwrap();
    let levels = monitor.effective_levels(&msg, "alice").unwrap();
    assert_eq!(levels.get("medical health").unwrap().to_string(), "disease");
    let out = monitor.handle_access("alice", "p1").unwrap();
    assert_eq!(out.text, "My disease is back and the doctor is worried.");

    let repo = fig4_repo(&kb, "strangers");
    let monitor = Monitor::new(&kb, &repo);
    let levels = monitor.effective_levels(&msg, "alice").unwrap();
    assert_eq!(levels.get("medical health").unwrap().to_string(), "illness");
    assert_eq!(
        monitor.handle_access("alice", "p1").unwrap().text,
        "My illness is back and the doctor is worried."
    );
}

#[test]
fn parties_read_without_their_own_rules() {
    let kb = fig10();
    let repo = fig4_repo(&kb, "close friends");
    let monitor = Monitor::new(&kb, &repo);
    // Ted reads as a stranger to Bob.
    assert_eq!(
        monitor.handle_access("ted", "p1").unwrap().text,
        "My illness is back and the doctor is worried."
    );
}

#[test]
fn unknown_message_and_unknown_reader() {
    let kb = fig10();
    let repo = fig4_repo(&kb, "close friends");
    let monitor = Monitor::new(&kb, &repo);
    assert!(matches!(monitor.handle_access("alice", "nope"), Err(Error::MessageNotFound(_))));
    // Strangers to Ted, who has no strangers rule, get nothing medical.
    assert_eq!(
        monitor.handle_access("mallory", "p1").unwrap().text,
        "My [withheld] is back and the doctor is worried."
    );
}

#[test]
fn cache_serves_identical_bytes_without_branch_queries() {
    let kb = fig10();
    let mut repo = MemoryRepository::new();
    repo.add_message(annotate(&kb, "m", "net", FIG6));
    repo.add_rules(RuleSet {
        publisher: "net".into(),
        categories: vec!["followers".into(), "clinicians".into()],
        rules: vec![
            PrivacyRule {
                st: "medical health".into(),
                cc: "followers".into(),
                al: Some("Infections".into()),
            },
            PrivacyRule {
                st: "medical health".into(),
                cc: "clinicians".into(),
                al: Some("HIV/AIDS/Hepatitis/STDs".into()),
            },
        ],
    });
    repo.contacts.insert("net", "ann", "clinicians").unwrap();
    let monitor = Monitor::new(&kb, &repo);
    let first = monitor.handle_access("ann", "m").unwrap();
    assert_eq!(first.text, FIG6);
    let before = kb.stats().branches;
    let second = monitor.handle_access("ann", "m").unwrap();
    assert_eq!(kb.stats().branches, before);
    assert_eq!(serde_json::to_string(&*first).unwrap(), serde_json::to_string(&*second).unwrap());
    assert_eq!(monitor.stats().cache_hits, 1);
    assert_eq!(monitor.cached_versions(), 1);
}
