//! Candidate senses for a handful of words, following title matches and
//! related resources into their categories.

use taxsan::kb::{KnowledgeBase, TaxonomyStore};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kb = TaxonomyStore::load_snapshot(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/fig9.taxsnap"))?;
    let words: Vec<String> = std::env::args().skip(1).collect();
    let words = if words.is_empty() {
        ["hiv", "virus", "people", "leper"].map(String::from).to_vec()
    } else {
        words
    };
    for w in &words {
        let senses = kb.candidate_senses(w)?;
        let labels: Vec<String> = senses.iter().map(|c| kb.label(c)).collect::<Result<_, _>>()?;
        println!("{w}: {}", labels.join(", "));
    }
    println!("{} lookups", kb.stats().lookups);
    Ok(())
}
