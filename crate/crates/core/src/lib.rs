//! Taxonomy-driven semantic annotation and sanitization of short messages.
//!
//! The crate is organised as a pipeline:
//!
//! * [`kb`] loads an offline taxonomy snapshot (or talks to a SPARQL endpoint)
//!   and answers ancestor, branch and sense-retrieval queries.
//! * [`nlp`] is a deterministic lexical front end: tokenizer, rule-based
//!   named-entity recognizer, part-of-speech tagger and noun-phrase chunker.
//! * [`annotate`] retrieves candidate senses for each noun phrase and picks the
//!   most coherent combination using an ancestor-set distance.
//! * [`policy`] compiles privacy requirements into rules, resolves access
//!   levels against the taxonomy and settles conflicts between co-publishers.
//! * [`engine`] is the access monitor: it works out which terms a reader may
//!   not see and replaces them by their allowed generalization.
//! * [`store`] persists annotated messages, rule sets and the contact graph.
//! * [`eval`] computes precision, recall and F-measure for detection and
//!   disambiguation runs.
//!
//! ```no_run
//! use taxsan::annotate::{Annotator, RawMessage};
//! use taxsan::kb::TaxonomyStore;
//!
//! let kb = TaxonomyStore::load_snapshot("fixtures/fig9.taxsnap").unwrap();
//! let annotator = Annotator::english();
//! let msg = RawMessage::new("m1", "alice", "Dealing with Hiv is hard.");
//! let annotated = annotator.annotate(&msg, &kb).unwrap();
//! println!("{}", annotated.to_json());
//! ```

pub mod annotate;
pub mod cli;
pub mod engine;
pub mod eval;
pub mod kb;
pub mod nlp;
pub mod policy;
pub mod store;

mod error;

pub use error::{Error, Result};
