//! The `taxsan` command line.
//!
//! Exit codes: 0 on success, 2 when input fails validation (bad rules,
//! unresolvable access levels, malformed messages), 1 on any other error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::annotate::{AnnotatedMessage, Annotator, RawMessage};
use crate::engine::{MemoryRepository, Monitor};
use crate::eval::{self, GoldFile, Manifest};
use crate::kb::{KnowledgeBase, TaxonomyStore};
use crate::policy::{compile_requirements, validate_rules, ContactGraph, Requirements, RuleSet, TopicCatalog};
use crate::store::ContentStore;
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "taxsan", version, about = "Taxonomy-driven message annotation and sanitization")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Annotate a message with knowledge-base senses.
    Annotate(AnnotateArgs),
    /// Sanitize a message for one reader.
    Sanitize(SanitizeArgs),
    /// Compile or validate privacy rules.
    #[command(subcommand)]
    Rules(RulesCommand),
    /// Score detection or disambiguation against gold files.
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Debug, Args)]
struct KbArgs {
    /// Taxonomy snapshot. Without it, the SPARQL endpoint named by
    /// TAXSAN_KB_ENDPOINT is used.
    #[arg(long)]
    kb: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnnotateArgs {
    #[command(flatten)]
    kb: KbArgs,
    /// Raw message as JSON: {id, publisher, co_publishers, text}.
    #[arg(long, conflicts_with = "text")]
    message: Option<PathBuf>,
    /// Message text given inline.
    #[arg(long)]
    text: Option<String>,
    #[arg(long, default_value = "m1")]
    id: String,
    #[arg(long, default_value = "anonymous")]
    publisher: String,
    /// Also persist the result in this content store.
    #[arg(long)]
    store: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SanitizeArgs {
    #[command(flatten)]
    kb: KbArgs,
    /// Annotated message JSON, or a raw message to annotate first.
    #[arg(long)]
    message: PathBuf,
    #[arg(long)]
    reader: String,
    /// Contact graph TSV: owner, contact, category.
    #[arg(long)]
    contacts: Option<PathBuf>,
    /// Rule set JSON of a publisher or co-publisher. Repeatable.
    #[arg(long)]
    rules: Vec<PathBuf>,
    /// Write the substitution ledger here.
    #[arg(long)]
    ledger: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum RulesCommand {
    /// Turn a requirements file into a rule set.
    Compile {
        #[arg(long)]
        requirements: PathBuf,
        /// Validate the levels against this snapshot as well.
        #[arg(long)]
        kb: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every access level of a rule set against the taxonomy.
    Validate {
        #[arg(long)]
        rules: PathBuf,
        #[command(flatten)]
        kb: KbArgs,
    },
}

#[derive(Debug, Args)]
struct CorpusArgs {
    #[command(flatten)]
    kb: KbArgs,
    #[arg(long, required_unless_present = "bundled")]
    manifest: Option<PathBuf>,
    #[arg(long, required_unless_present = "bundled")]
    gold: Option<PathBuf>,
    /// Use the corpus shipped with the crate.
    #[arg(long, conflicts_with_all = ["manifest", "gold"])]
    bundled: bool,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum EvalCommand {
    /// Precision and recall of sensitive-term detection.
    Detect(CorpusArgs),
    /// Precision and recall of chosen senses.
    Wsd(CorpusArgs),
}

enum Failure {
    Invalid(String),
    Error(Error),
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Error(e.into())
    }
}

type Outcome = Result<(), Failure>;

/// Parses `args` and runs the command. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Annotate(a) => annotate(a, stdout),
        Command::Sanitize(a) => sanitize(a, stdout),
        Command::Rules(RulesCommand::Compile { requirements, kb, out }) => {
            rules_compile(&requirements, kb.as_deref(), out.as_deref(), stdout)
        }
        Command::Rules(RulesCommand::Validate { rules, kb }) => rules_validate(&rules, &kb, stdout),
        Command::Eval(EvalCommand::Detect(a)) => evaluate(a, false, stdout),
        Command::Eval(EvalCommand::Wsd(a)) => evaluate(a, true, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Invalid(msg)) => {
            let _ = writeln!(stderr, "validation failed: {msg}");
            2
        }
        Err(Failure::Error(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    serde_json::from_str(&read(path)?).map_err(|source| Error::Json {
        path: path.display().to_string(),
        source,
    })
}

fn open_kb(args: &KbArgs) -> Result<Box<dyn KnowledgeBase + Sync>, Error> {
    if let Some(path) = &args.kb {
        return Ok(Box::new(TaxonomyStore::load_snapshot(path)?));
    }
    #[cfg(feature = "remote")]
    {
        Ok(Box::new(crate::kb::remote::SparqlKb::from_env()?))
    }
    #[cfg(not(feature = "remote"))]
    {
        Err(Error::Configuration("--kb is required".into()))
    }
}

fn annotate(a: AnnotateArgs, stdout: &mut dyn Write) -> Outcome {
    let kb = open_kb(&a.kb)?;
    let msg = match (&a.message, a.text) {
        (Some(path), _) => json::<RawMessage>(path)?,
        (None, Some(text)) => RawMessage::new(a.id, a.publisher, text),
        (None, None) => return Err(Failure::Invalid("either --message or --text is required".into())),
    };
    let annotated = Annotator::english().annotate(&msg, kb.as_ref())?;
    if let Some(dir) = &a.store {
        ContentStore::open(dir)?.put_annotated(&annotated)?;
    }
    let mut text = annotated.to_json();
    text.push('\n');
    emit(&text, a.out.as_deref(), stdout)?;
    Ok(())
}

fn sanitize(a: SanitizeArgs, stdout: &mut dyn Write) -> Outcome {
    let kb = open_kb(&a.kb)?;
    let text = read(&a.message)?;
    let annotated = match AnnotatedMessage::from_json(&text) {
        Ok(m) => {
            m.validate().map_err(Failure::Invalid)?;
            m
        }
        Err(_) => {
            let raw: RawMessage = serde_json::from_str(&text).map_err(|source| Error::Json {
                path: a.message.display().to_string(),
                source,
            })?;
            Annotator::english().annotate(&raw, kb.as_ref())?
        }
    };
    let mut repo = MemoryRepository::new();
    if let Some(path) = &a.contacts {
        repo.contacts = ContactGraph::from_tsv(&read(path)?)?;
    }
    for path in &a.rules {
        repo.add_rules(json::<RuleSet>(path)?);
    }
    let id = annotated.message_id.clone();
    repo.add_message(annotated);
    let monitor = Monitor::new(kb.as_ref(), &repo);
    let out = monitor.handle_access(&a.reader, &id).map_err(|e| match e {
        Error::Policy(p) => Failure::Invalid(p.to_string()),
        other => Failure::Error(other),
    })?;
    if let Some(path) = &a.ledger {
        emit(&(out.ledger_json() + "\n"), Some(path), stdout)?;
    }
    emit(&(out.text.clone() + "\n"), a.out.as_deref(), stdout)?;
    Ok(())
}

fn rules_compile(requirements: &Path, kb: Option<&Path>, out: Option<&Path>, stdout: &mut dyn Write) -> Outcome {
    let catalog = TopicCatalog::default();
    let req = Requirements::from_json(&read(requirements)?).map_err(|e| Failure::Invalid(e.to_string()))?;
    let rules = compile_requirements(&req, &catalog).map_err(|e| Failure::Invalid(e.to_string()))?;
    if let Some(path) = kb {
        let kb = TaxonomyStore::load_snapshot(path)?;
        let report = validate_rules(&rules, &kb, &catalog)?;
        if !report.is_ok() {
            return Err(Failure::Invalid(format!("\n{report}")));
        }
    }
    emit(&(rules.to_json() + "\n"), out, stdout)?;
    Ok(())
}

fn rules_validate(rules: &Path, kb: &KbArgs, stdout: &mut dyn Write) -> Outcome {
    let kb = open_kb(kb)?;
    let rules = RuleSet::from_json(&read(rules)?).map_err(|e| Failure::Invalid(e.to_string()))?;
    let report = validate_rules(&rules, kb.as_ref(), &TopicCatalog::default())?;
    emit(&report.to_string(), None, stdout)?;
    if report.is_ok() {
        Ok(())
    } else {
        Err(Failure::Invalid(format!("{} rule(s) failed", report.failures().count())))
    }
}

fn evaluate(a: CorpusArgs, wsd: bool, stdout: &mut dyn Write) -> Outcome {
    let (manifest, gold, kb): (Manifest, GoldFile, Box<dyn KnowledgeBase + Sync>) = if a.bundled {
        let gold = if wsd { eval::bundled::gold_wsd()? } else { eval::bundled::gold_detect()? };
        let kb: Box<dyn KnowledgeBase + Sync> = match &a.kb.kb {
            Some(_) => open_kb(&a.kb)?,
            None => Box::new(eval::bundled::taxonomy()?),
        };
        (eval::bundled::manifest()?, gold, kb)
    } else {
        let manifest = Manifest::load(a.manifest.as_deref().expect("required by clap"))?;
        let gold = GoldFile::load(a.gold.as_deref().expect("required by clap"))?;
        (manifest, gold, open_kb(&a.kb)?)
    };
    gold.check_against(&manifest).map_err(|e| Failure::Invalid(e.to_string()))?;
    let annotator = Annotator::english();
    let rows = if wsd {
        eval::eval_wsd(&manifest, &gold, kb.as_ref(), &annotator)?
    } else {
        eval::eval_detect(&manifest, &gold, kb.as_ref(), &annotator, &TopicCatalog::default())?
    };
    let text = if a.json {
        serde_json::to_string_pretty(&rows).expect("reports always serialize") + "\n"
    } else {
        eval::render_table(&rows)
    };
    emit(&text, a.out.as_deref(), stdout)?;
    Ok(())
}
