//! One post, three readers in different contact categories.

use taxsan::annotate::{Annotator, RawMessage};
use taxsan::engine::{MemoryRepository, Monitor};
use taxsan::kb::TaxonomyStore;
use taxsan::policy::{compile_requirements, ContactGraph, Requirements, TopicCatalog};

fn fixture(name: &str) -> std::io::Result<String> {
    std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR")))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kb = TaxonomyStore::from_snapshot_str(&fixture("fig10.taxsnap")?)?;
    let raw: RawMessage = serde_json::from_str(&fixture("fig6_message.json")?)?;
    let req = Requirements::from_json(&fixture("requirements/health_network.json")?)?;

    let mut repo = MemoryRepository::new();
    repo.add_message(Annotator::english().annotate(&raw, &kb)?);
    repo.add_rules(compile_requirements(&req, &TopicCatalog::default())?);
    repo.contacts = ContactGraph::from_tsv(&fixture("contacts.tsv")?)?;

    let monitor = Monitor::new(&kb, &repo);
    for reader in ["ann", "fred", "rita", "someone"] {
        let out = monitor.handle_access(reader, &raw.id)?;
        println!("{reader} ({}):", repo.contacts.category(&raw.publisher, reader));
        println!("  {}", out.text);
        for s in &out.substitutions {
            println!("    {} -> {}", s.surface, s.replacement);
        }
    }
    let stats = monitor.stats();
    println!("{} requests, {} served from cache", stats.requests, stats.cache_hits);
    Ok(())
}
