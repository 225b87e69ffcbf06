//! Helpers shared by the integration tests: corpus loading and a seeded
//! generator of small well-formed programs for the strict-vs-relaxed
//! mutation property.

#![allow(dead_code)]

use minioo::parser::load_program;
use minioo::resolve::{resolve, ResolvedProgram};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn read_corpus(names: &[&str]) -> Vec<(String, String)> {
    names
        .iter()
        .map(|n| {
            let path = corpus_dir().join("src").join(n);
            let text = std::fs::read_to_string(&path)
                .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
            (format!("src/{n}"), text)
        })
        .collect()
}

/// Load and resolve a set of corpus sources; panics on any front-end error
/// so tests fail loudly if the corpus rots.
pub fn resolve_corpus(names: &[&str]) -> ResolvedProgram {
    let prog = load_program(&read_corpus(names))
        .unwrap_or_else(|e| panic!("corpus {names:?} does not parse: {e}"));
    resolve(prog).unwrap_or_else(|errs| {
        panic!(
            "corpus {names:?} does not resolve:\n{}",
            errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
        )
    })
}

/// Resolve a single inline source, for snippet-level tests.
pub fn resolve_src(src: &str) -> ResolvedProgram {
    let prog = load_program(&[("snippet.moo".into(), src.into())])
        .unwrap_or_else(|e| panic!("snippet does not parse: {e}"));
    resolve(prog).unwrap_or_else(|errs| {
        panic!(
            "snippet does not resolve:\n{}",
            errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
        )
    })
}

/// All corpus source files, for whole-corpus sweeps.
pub fn all_corpus_files() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(corpus_dir().join("src"))
        .expect("corpus src dir")
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".moo"))
        .collect();
    names.sort();
    names
}

/// The file sets that form complete, runnable or checkable programs.
/// Mirrors the manifest's groupings.
pub fn corpus_families() -> Vec<Vec<&'static str>> {
    vec![
        vec!["cbag.moo"],
        vec!["cbag.moo", "cset.moo"],
        vec!["cbag.moo", "vcbag.moo"],
        vec!["cbag.moo", "cset.moo", "vcset_foo1.moo"],
        vec!["cbag.moo", "cset.moo", "vcset_foo2.moo"],
        vec!["fbag.moo"],
        vec!["fbag.moo", "fset.moo"],
        vec!["fbag.moo", "fset_broken.moo"],
        vec!["fbag.moo", "vfbag.moo"],
        vec!["fbag.moo", "fset.moo", "vfset.moo"],
        vec!["fbag.moo", "fset.moo", "fset_demo.moo"],
        vec!["shapes_oop.moo"],
        vec!["shapes_brules.moo"],
        vec!["ufdemo.moo"],
    ]
}

// --- seeded program generator -------------------------------------------

/// Emit a small program that always parses and resolves. Bodies are built
/// from statement templates over freshly named locals, with a per-function
/// coin deciding whether mutating templates are allowed, so the output
/// population straddles the strict/relaxed line in both directions.
pub fn generate_program(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();

    if rng.gen_bool(0.4) {
        gen_class(&mut rng, &mut out);
    }
    let nfns = rng.gen_range(1..=4);
    for i in 0..nfns {
        gen_fn(&mut rng, &mut out, i);
    }
    out
}

fn gen_class(rng: &mut ChaCha8Rng, out: &mut String) {
    let exported = if rng.gen_bool(0.5) { "export " } else { "" };
    out.push_str(&format!("{exported}class Box {{\npublic:\n"));
    out.push_str("    int peek() {\n        return v;\n    }\n");
    if rng.gen_bool(0.5) {
        out.push_str("    unit poke(int nv) {\n        v = nv;\n    }\n");
    }
    out.push_str("private:\n    int v;\n\n    Box(int v0) : v(v0) {}\n}\n\n");
    if rng.gen_bool(0.3) {
        // A derived class, sometimes delegating and sometimes not.
        if rng.gen_bool(0.5) {
            out.push_str("class TaggedBox : Box {\n    TaggedBox() : Box(0) {}\n}\n\n");
        } else {
            out.push_str("class TaggedBox : Box {\n    TaggedBox(int v0) : Box(v0) {}\n}\n\n");
        }
    }
}

fn gen_fn(rng: &mut ChaCha8Rng, out: &mut String, idx: usize) {
    let mutating = rng.gen_bool(0.5);
    let mode = if mutating && rng.gen_bool(0.5) { "ref " } else { "" };
    out.push_str(&format!("int f{idx}({mode}int a, list xs) {{\n"));
    let mut locals = vec!["a".to_string()];
    let nstmts = rng.gen_range(1..=4);
    for s in 0..nstmts {
        let name = format!("l{s}");
        match rng.gen_range(0..4) {
            0 => {
                out.push_str(&format!("    let {name} = a + {};\n", rng.gen_range(0..9)));
                locals.push(name);
            }
            1 if mutating => {
                let target = &locals[rng.gen_range(0..locals.len())];
                out.push_str(&format!("    {target} = {target} * 2;\n"));
            }
            2 => {
                out.push_str(&format!(
                    "    if (a > {}) {{\n        return a;\n    }}\n",
                    rng.gen_range(0..5)
                ));
            }
            _ => {
                out.push_str(&format!("    let {name} = is_nil(xs);\n"));
                if rng.gen_bool(0.5) {
                    out.push_str(&format!(
                        "    if ({name}) {{\n        return {};\n    }}\n",
                        rng.gen_range(0..9)
                    ));
                }
                locals.push(name);
            }
        }
    }
    out.push_str("    return a;\n}\n\n");
}
