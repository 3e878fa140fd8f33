//! Annotates a message and prints each noun phrase with its chosen sense.
//!
//! Pass the message text as arguments, or run without to use a sample post.

use taxsan::annotate::{Annotator, RawMessage};
use taxsan::kb::{KnowledgeBase, TaxonomyStore};

const SAMPLE: &str = "Dealing with Hiv and then being told that you suffer from AIDS is almost \
the hardest thing to face with in life. The hardest thing is dealing with the virus because \
there are people that just do not understand and think that you are a leper.";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kb = TaxonomyStore::load_snapshot(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/fig9.taxsnap"))?;
    let args: Vec<String> = std::env::args().skip(1).collect();
    let text = if args.is_empty() { SAMPLE.to_owned() } else { args.join(" ") };

    let (m, report) = Annotator::english().annotate_with_report(&RawMessage::new("m1", "me", text), &kb)?;
    for p in &m.phrases {
        let sense = match &p.chosen {
            Some(c) => kb.label(c)?,
            None => "-".into(),
        };
        println!("{:>4}..{:<4} {:<22} {:<12} {sense}", p.span.0, p.span.1, p.surface, p.head);
    }
    for e in &m.entities {
        println!("{:>4}..{:<4} {:<22} [{}]", e.span.0, e.span.1, e.surface, e.category);
    }
    println!("{} lookups, cost {:.3}", report.lookups, report.disambiguation.cost);
    Ok(())
}
