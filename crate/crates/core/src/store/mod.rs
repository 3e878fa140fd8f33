//! File-backed persistence.
//!
//! ```text
//! <root>/messages/<id>.json     annotated messages, write-once
//! <root>/rules/<publisher>.json rule sets, replaced atomically
//! <root>/contacts.tsv           owner, contact, category
//! ```
//!
//! Ids are percent-encoded in file names. Every write goes to a temporary
//! file first, so readers see either the old record or the new one.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::annotate::AnnotatedMessage;
use crate::policy::{ContactGraph, PolicyError, RuleSet};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{kind} `{id}` not found")]
    NotFound { kind: &'static str, id: String },
    #[error("message `{0}` already stored")]
    Collision(String),
    #[error("message `{id}` is invalid: {reason}")]
    Invalid { id: String, reason: String },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed record {}: {message}", path.display())]
    Corrupt { path: PathBuf, message: String },
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Percent-encodes everything outside `[A-Za-z0-9._-]`, plus a leading dot.
pub fn encode_id(id: &str) -> String {
    let mut out = String::with_capacity(id.len());
    for (i, b) in id.bytes().enumerate() {
        let plain = b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || (b == b'.' && i > 0);
        if plain {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

pub fn decode_id(name: &str) -> Option<String> {
    let bytes = name.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = name.get(i + 1..i + 3)?;
            out.push(u8::from_str_radix(hex, 16).ok()?);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).ok()
}

static TMP_SEQ: AtomicU64 = AtomicU64::new(0);

#[derive(Debug)]
pub struct ContentStore {
    root: PathBuf,
    contacts_lock: Mutex<()>,
}

impl ContentStore {
    /// Opens a store, creating its directories as needed.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        for sub in ["messages", "rules"] {
            let dir = root.join(sub);
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        }
        Ok(Self {
            root,
            contacts_lock: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn message_path(&self, id: &str) -> PathBuf {
        self.root.join("messages").join(format!("{}.json", encode_id(id)))
    }

    fn rules_path(&self, publisher: &str) -> PathBuf {
        self.root.join("rules").join(format!("{}.json", encode_id(publisher)))
    }

    fn contacts_path(&self) -> PathBuf {
        self.root.join("contacts.tsv")
    }

    fn write_temp(&self, dir: &Path, bytes: &[u8]) -> Result<PathBuf, StoreError> {
        let seq = TMP_SEQ.fetch_add(1, Ordering::Relaxed);
        let tmp = dir.join(format!(".tmp-{}-{seq}", std::process::id()));
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
        Ok(tmp)
    }

    fn replace(&self, path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
        let dir = path.parent().expect("record paths have a parent");
        let tmp = self.write_temp(dir, bytes)?;
        fs::rename(&tmp, path).map_err(|e| {
            let _ = fs::remove_file(&tmp);
            io_err(path)(e)
        })
    }

    /// Stores a validated message under its id. Ids are write-once.
    pub fn put_annotated(&self, msg: &AnnotatedMessage) -> Result<String, StoreError> {
        msg.validate().map_err(|reason| StoreError::Invalid {
            id: msg.message_id.clone(),
            reason,
        })?;
        let path = self.message_path(&msg.message_id);
        let dir = path.parent().expect("record paths have a parent");
        let tmp = self.write_temp(dir, msg.to_json().as_bytes())?;
        // A hard link fails if the target exists, which makes the
        // collision check and the publish one atomic step.
        let linked = fs::hard_link(&tmp, &path);
        let _ = fs::remove_file(&tmp);
        match linked {
            Ok(()) => Ok(msg.message_id.clone()),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(StoreError::Collision(msg.message_id.clone())),
            Err(e) => Err(io_err(&path)(e)),
        }
    }

    /// The stored serialization, byte for byte.
    pub fn get_annotated_json(&self, id: &str) -> Result<String, StoreError> {
        let path = self.message_path(id);
        fs::read_to_string(&path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => StoreError::NotFound {
                kind: "message",
                id: id.to_owned(),
            },
            _ => io_err(&path)(e),
        })
    }

    pub fn get_annotated(&self, id: &str) -> Result<AnnotatedMessage, StoreError> {
        let text = self.get_annotated_json(id)?;
        AnnotatedMessage::from_json(&text).map_err(|e| StoreError::Corrupt {
            path: self.message_path(id),
            message: e.to_string(),
        })
    }

    pub fn contains_message(&self, id: &str) -> bool {
        self.message_path(id).is_file()
    }

    /// Stored message ids, sorted.
    pub fn message_ids(&self) -> Result<Vec<String>, StoreError> {
        list_ids(&self.root.join("messages"))
    }

    pub fn put_rules(&self, rules: &RuleSet) -> Result<(), StoreError> {
        self.replace(&self.rules_path(&rules.publisher), rules.to_json().as_bytes())
    }

    pub fn get_rules(&self, publisher: &str) -> Result<RuleSet, StoreError> {
        self.try_rules(publisher)?.ok_or_else(|| StoreError::NotFound {
            kind: "rule set",
            id: publisher.to_owned(),
        })
    }

    /// `None` when the publisher never stored rules.
    pub fn try_rules(&self, publisher: &str) -> Result<Option<RuleSet>, StoreError> {
        let path = self.rules_path(publisher);
        match fs::read_to_string(&path) {
            Ok(text) => RuleSet::from_json(&text)
                .map(Some)
                .map_err(|e| StoreError::Corrupt { path, message: e.to_string() }),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(io_err(&path)(e)),
        }
    }

    pub fn publishers(&self) -> Result<Vec<String>, StoreError> {
        list_ids(&self.root.join("rules"))
    }

    /// The stored contact graph; empty when none was written.
    pub fn contacts(&self) -> Result<ContactGraph, StoreError> {
        let path = self.contacts_path();
        match fs::read_to_string(&path) {
            Ok(text) => Ok(ContactGraph::from_tsv(&text)?),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(ContactGraph::new()),
            Err(e) => Err(io_err(&path)(e)),
        }
    }

    pub fn put_contacts(&self, graph: &ContactGraph) -> Result<(), StoreError> {
        let _guard = self.contacts_lock.lock().unwrap_or_else(|p| p.into_inner());
        self.replace(&self.contacts_path(), graph.to_tsv().as_bytes())
    }

    pub fn add_contact(&self, owner: &str, contact: &str, category: &str) -> Result<(), StoreError> {
        let _guard = self.contacts_lock.lock().unwrap_or_else(|p| p.into_inner());
        let mut graph = self.contacts()?;
        graph.insert(owner, contact, category)?;
        self.replace(&self.contacts_path(), graph.to_tsv().as_bytes())
    }

    /// `contact`'s category in `owner`'s graph, `strangers` without an edge.
    pub fn get_category(&self, owner: &str, contact: &str) -> Result<String, StoreError> {
        Ok(self.contacts()?.category(owner, contact).to_owned())
    }
}

fn list_ids(dir: &Path) -> Result<Vec<String>, StoreError> {
    let mut ids = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        if name.starts_with('.') {
            continue;
        }
        if let Some(id) = name.strip_suffix(".json").and_then(decode_id) {
            ids.push(id);
        }
    }
    ids.sort();
    Ok(ids)
}
