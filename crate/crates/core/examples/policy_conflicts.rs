//! A post by Bob that tags Ted. Alice is a close friend of both, but Ted
//! only lets close friends see "liver disease" while Bob allows "disease".

use taxsan::annotate::{Annotator, RawMessage};
use taxsan::engine::{MemoryRepository, Monitor, Repository};
use taxsan::kb::TaxonomyStore;
use taxsan::policy::{compile_requirements, ContactGraph, Requirements, TopicCatalog};

fn fixture(name: &str) -> std::io::Result<String> {
    std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR")))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kb = TaxonomyStore::from_snapshot_str(&fixture("fig10.taxsnap")?)?;
    let catalog = TopicCatalog::default();
    let raw: RawMessage = serde_json::from_str(&fixture("shared_message.json")?)?;

    for contacts in ["contacts.tsv", "contacts_alice_stranger_to_bob.tsv"] {
        let mut repo = MemoryRepository::new();
        repo.add_message(Annotator::english().annotate(&raw, &kb)?);
        for f in ["requirements/bob_shared.json", "requirements/ted_shared.json"] {
            repo.add_rules(compile_requirements(&Requirements::from_json(&fixture(f)?)?, &catalog)?);
        }
        repo.contacts = ContactGraph::from_tsv(&fixture(contacts)?)?;

        let monitor = Monitor::new(&kb, &repo);
        let msg = repo.annotated(&raw.id)?;
        println!("with {contacts}:");
        for p in monitor.party_levels(&msg, "alice")? {
            let medical = p.levels.iter().find(|(t, _)| t == "medical health").map(|(_, l)| l.to_string());
            println!("  {} sees alice as {:?}, allows {}", p.party, p.category, medical.unwrap_or_default());
        }
        let levels = monitor.effective_levels(&msg, "alice")?;
        if let Some(l) = levels.get("medical health") {
            println!("  effective: {l}");
        }
        println!("  {}", monitor.handle_access("alice", &raw.id)?.text);
    }
    Ok(())
}
