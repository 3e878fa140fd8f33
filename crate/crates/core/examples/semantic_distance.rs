//! Pairwise distances between a few senses of the sample taxonomy.
//!
//! ```text
//! cargo run --example semantic_distance
//! ```

use taxsan::annotate::{semantic_distance, SenseCandidate};
use taxsan::kb::{ConceptId, TaxonomyStore};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kb = TaxonomyStore::load_snapshot(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/fig9.taxsnap"))?;
    let ids = ["HIV", "STDs", "AIDS", "Life", "Viruses"];
    let senses: Vec<SenseCandidate> = ids
        .iter()
        .map(|id| SenseCandidate::new(&kb, ConceptId::new(*id)))
        .collect::<Result<_, _>>()?;

    print!("{:>8}", "");
    for id in ids {
        print!("{id:>8}");
    }
    println!();
    for a in &senses {
        print!("{:>8}", a.concept.as_str());
        for b in &senses {
            print!("{:>8.3}", semantic_distance(a, b));
        }
        println!();
    }
    Ok(())
}
