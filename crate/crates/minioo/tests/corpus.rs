//! The corpus is the ground truth: every fixture must replay its golden
//! byte-for-byte, and the verifier must actually notice when one drifts.

mod common;

use common::corpus_dir;
use minioo::corpusck::{parse_manifest, run};

fn run_verifier(dir: &std::path::Path, bless: bool) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(dir, bless, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn every_fixture_replays_its_golden() {
    let (code, out, err) = run_verifier(&corpus_dir(), false);
    assert_eq!(code, 0, "corpus drifted:\n{out}\n{err}");
    assert!(out.contains("0 mismatch(es)"), "got: {out}");
}

#[test]
fn manifest_covers_every_command_and_source_file() {
    let text = std::fs::read_to_string(corpus_dir().join("manifest.txt")).unwrap();
    let fixtures = parse_manifest(&text).unwrap();
    assert_eq!(fixtures.len(), 26);

    // Every subcommand is exercised.
    for sub in ["check", "run", "subst", "diff", "iso"] {
        assert!(
            fixtures.iter().any(|f| f.args.first().map(String::as_str) == Some(sub)),
            "no fixture runs `{sub}`"
        );
    }

    // Every corpus source participates in at least one fixture.
    for file in common::all_corpus_files() {
        let arg = format!("src/{file}");
        assert!(
            fixtures.iter().any(|f| f.args.contains(&arg)),
            "{file} is dead weight in the corpus"
        );
    }
}

#[test]
fn the_verifier_notices_tampered_goldens() {
    // Copy the corpus into a sandbox, flip one golden byte, expect a named
    // mismatch.
    let dir = tempfile::tempdir().unwrap();
    copy_tree(&corpus_dir(), dir.path());

    let golden = dir.path().join("golden/run_ufdemo/out.txt");
    let mut text = std::fs::read_to_string(&golden).unwrap();
    text = text.replacen("1806", "1807", 1);
    std::fs::write(&golden, text).unwrap();

    let (code, out, _) = run_verifier(dir.path(), false);
    assert_eq!(code, 1);
    assert!(out.contains("run_ufdemo"), "the drifted fixture is named: {out}");
    let (_, out, _) = run_verifier(dir.path(), false);
    assert!(out.matches("ok").count() >= 25, "other fixtures still pass: {out}");
}

#[test]
fn blessing_a_sandbox_copy_reaches_a_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    copy_tree(&corpus_dir(), dir.path());

    let (code, _, _) = run_verifier(dir.path(), true);
    assert_eq!(code, 0, "bless never fails on runnable fixtures");
    let (code, out, _) = run_verifier(dir.path(), false);
    assert_eq!(code, 0, "fresh goldens replay: {out}");
}

fn copy_tree(from: &std::path::Path, to: &std::path::Path) {
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            std::fs::create_dir_all(&target).unwrap();
            copy_tree(&entry.path(), &target);
        } else {
            std::fs::copy(entry.path(), &target).unwrap();
        }
    }
}
