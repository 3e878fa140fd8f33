//! Sense lookup against a live SPARQL endpoint.
//!
//! ```text
//! TAXSAN_KB_ENDPOINT=https://dbpedia.org/sparql cargo run --example remote_kb -- hepatitis
//! ```

use taxsan::kb::remote::SparqlKb;
use taxsan::kb::KnowledgeBase;

fn main() {
    let kb = match SparqlKb::from_env() {
        Ok(kb) => kb,
        Err(e) => {
            eprintln!("{e}; nothing to query");
            return;
        }
    };
    let word = std::env::args().nth(1).unwrap_or_else(|| "hepatitis".into());
    match kb.candidate_senses(&word) {
        Ok(senses) => {
            println!("{} candidate senses for {word:?} from {}", senses.len(), kb.endpoint());
            for c in senses.iter().take(20) {
                println!("  {c}");
            }
        }
        Err(e) => eprintln!("query failed: {e}"),
    }
}
