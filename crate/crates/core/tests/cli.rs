mod support;

use std::path::{Path, PathBuf};
use std::process::Command;

use support::FIG6;
use taxsan::annotate::AnnotatedMessage;
use taxsan::policy::RuleSet;

fn fx(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("taxsan").chain(args.iter().copied());
    let code = taxsan::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn compile(requirements: &str, dir: &Path) -> PathBuf {
    let out = dir.join(requirements.replace('/', "_"));
    let (code, _, err) = run(&[
        "rules",
        "compile",
        "--requirements",
        &fx(requirements),
        "--kb",
        &fx("fig10.taxsnap"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    out
}

#[test]
fn annotate_inline_text() {
    let (code, out, _) = run(&["annotate", "--kb", &fx("fig9.taxsnap"), "--text", FIG6, "--id", "x"]);
    assert_eq!(code, 0);
    let m = AnnotatedMessage::from_json(&out).unwrap();
    assert_eq!(m.message_id, "x");
    assert_eq!(m.phrases.len(), 8);
}

#[test]
fn annotate_into_store() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let (code, _, err) = run(&[
        "annotate",
        "--kb",
        &fx("fig9.taxsnap"),
        "--message",
        &fx("fig6_message.json"),
        "--store",
        store.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let store = taxsan::store::ContentStore::open(&store).unwrap();
    assert!(store.contains_message("fig6"));
}

#[test]
fn sanitize_per_reader() {
    let dir = tempfile::tempdir().unwrap();
    let rules = compile("requirements/health_network.json", dir.path());
    let ledger = dir.path().join("ledger.json");
    let cases = [
        ("ann", FIG6),
        ("fred", "Dealing with infection and then"),
        ("rita", "Dealing with ill health and then"),
    ];
    for (reader, prefix) in cases {
        let (code, out, err) = run(&[
            "sanitize",
            "--kb",
            &fx("fig10.taxsnap"),
            "--message",
            &fx("fig6_message.json"),
            "--reader",
            reader,
            "--contacts",
            &fx("contacts.tsv"),
            "--rules",
            rules.to_str().unwrap(),
            "--ledger",
            ledger.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        assert!(out.starts_with(prefix), "{reader}: {out}");
    }
    let ledger: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&ledger).unwrap()).unwrap();
    assert!(ledger.is_object() || ledger.is_array());
}

#[test]
fn sanitize_shared_message() {
    let dir = tempfile::tempdir().unwrap();
    let bob = compile("requirements/bob_shared.json", dir.path());
    let ted = compile("requirements/ted_shared.json", dir.path());
    for (contacts, word) in [("contacts.tsv", "disease"), ("contacts_alice_stranger_to_bob.tsv", "illness")] {
        let (code, out, err) = run(&[
            "sanitize",
            "--kb",
            &fx("fig10.taxsnap"),
            "--message",
            &fx("shared_message.json"),
            "--reader",
            "alice",
            "--contacts",
            &fx(contacts),
            "--rules",
            bob.to_str().unwrap(),
            "--rules",
            ted.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        assert_eq!(out, format!("My {word} is back and the doctor is worried.\n"));
    }
}

#[test]
fn rules_compile_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let path = compile("requirements/bob_example1.json", dir.path());
    let rules = RuleSet::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rules.publisher, "bob");
    let (code, _, _) = run(&["rules", "validate", "--rules", path.to_str().unwrap(), "--kb", &fx("fig10.taxsnap")]);
    assert_eq!(code, 0);
}

#[test]
fn unresolvable_level_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"publisher":"x","categories":["friends"],"rules":[{"st":"medical health","cc":"friends","al":"no such thing"}]}"#,
    )
    .unwrap();
    let (code, _, err) = run(&["rules", "validate", "--rules", path.to_str().unwrap(), "--kb", &fx("fig10.taxsnap")]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn eval_bundled_and_files() {
    let (code, out, _) = run(&["eval", "detect", "--bundled", "--json"]);
    assert_eq!(code, 0);
    let rows: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 8);

    let (code, out, err) = run(&[
        "eval",
        "wsd",
        "--kb",
        &fx("fig9.taxsnap"),
        "--manifest",
        &fx("fig6_manifest.json"),
        "--gold",
        &fx("fig6_wsd.tsv"),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("100"), "{out}");
}

#[test]
fn usage_errors_exit_2_and_missing_files_exit_1() {
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["eval", "detect"]).0, 2);
    let (code, _, err) = run(&["annotate", "--kb", "/nonexistent.taxsnap", "--text", "x"]);
    assert_eq!(code, 1);
    assert!(!err.is_empty());
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("sanitize"));
}

#[test]
fn binary_runs() {
    let out = Command::new(env!("CARGO_BIN_EXE_taxsan"))
        .args(["eval", "detect", "--bundled"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_taxsan")).arg("nope").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
