//! Detection and disambiguation scores on the corpus shipped with the crate.

use taxsan::annotate::Annotator;
use taxsan::eval::{bundled, eval_detect, eval_wsd, render_table};
use taxsan::policy::TopicCatalog;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kb = bundled::taxonomy()?;
    let manifest = bundled::manifest()?;
    let annotator = Annotator::english();

    let rows = eval_detect(&manifest, &bundled::gold_detect()?, &kb, &annotator, &TopicCatalog::default())?;
    println!("detection\n{}", render_table(&rows));

    let rows = eval_wsd(&manifest, &bundled::gold_wsd()?, &kb, &annotator)?;
    println!("senses\n{}", render_table(&rows));
    Ok(())
}
