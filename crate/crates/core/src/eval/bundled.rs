//! A small health-forum corpus shipped with the crate: four posts, each
//! evaluated under `Infections` and `ill health`.

use super::{EvalError, GoldFile, Manifest};
use crate::kb::{KbError, TaxonomyStore};

pub const MANIFEST: &str = include_str!("../../data/corpus/manifest.json");
pub const TAXONOMY: &str = include_str!("../../data/corpus/corpus.taxsnap");
pub const GOLD_DETECT: &str = include_str!("../../data/corpus/gold_detect.tsv");
pub const GOLD_WSD: &str = include_str!("../../data/corpus/gold_wsd.tsv");

pub fn manifest() -> Result<Manifest, EvalError> {
    Manifest::from_json(MANIFEST)
}

pub fn taxonomy() -> Result<TaxonomyStore, KbError> {
    TaxonomyStore::from_snapshot_str(TAXONOMY)
}

pub fn gold_detect() -> Result<GoldFile, EvalError> {
    GoldFile::parse(GOLD_DETECT)
}

pub fn gold_wsd() -> Result<GoldFile, EvalError> {
    GoldFile::parse(GOLD_WSD)
}
