//! Golden-fixture replay for a corpus directory.
//!
//! The manifest (`manifest.txt`) names one fixture per line:
//!
//! ```text
//! # NAME: COMMAND
//! check_bags: check src/cbag.moo src/cset.moo --rules all
//! ```
//!
//! Each command is a `minioo` invocation whose paths are relative to the
//! corpus directory. Verification re-runs the command in-process and
//! byte-compares its standard output and exit code against
//! `golden/NAME/out.txt` and `golden/NAME/exit`; `--bless` rewrites the
//! goldens from current behavior instead. Fixtures are independent, so
//! they may run concurrently, but the report is always ordered by
//! fixture name and names the first difference it finds in each one.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

macro_rules! say {
    ($dst:expr, $($arg:tt)*) => {{ let _ = writeln!($dst, $($arg)*); }};
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub name: String,
    pub args: Vec<String>,
}

pub fn parse_manifest(text: &str) -> Result<Vec<Fixture>, String> {
    let mut fixtures = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((name, command)) = line.split_once(':') else {
            return Err(format!("manifest line {}: expected `NAME: COMMAND`", i + 1));
        };
        let name = name.trim();
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(format!("manifest line {}: bad fixture name `{name}`", i + 1));
        }
        if !seen.insert(name.to_string()) {
            return Err(format!("manifest line {}: duplicate fixture `{name}`", i + 1));
        }
        let args: Vec<String> = command.split_whitespace().map(str::to_string).collect();
        if args.is_empty() {
            return Err(format!("manifest line {}: fixture `{name}` has no command", i + 1));
        }
        fixtures.push(Fixture { name: name.to_string(), args });
    }
    Ok(fixtures)
}

struct Outcome {
    name: String,
    stdout: Vec<u8>,
    exit: i32,
}

fn replay(dir: &Path, f: &Fixture) -> Outcome {
    let mut out = Vec::new();
    // Fixture stderr is not part of the golden contract; drop it.
    let mut err = Vec::new();
    let exit = crate::cli::run_with(&f.args, &mut out, &mut err, dir);
    Outcome { name: f.name.clone(), stdout: out, exit }
}

#[cfg(feature = "parallel")]
fn replay_all(dir: &Path, fixtures: &[Fixture]) -> Vec<Outcome> {
    use rayon::prelude::*;
    fixtures.par_iter().map(|f| replay(dir, f)).collect()
}

#[cfg(not(feature = "parallel"))]
fn replay_all(dir: &Path, fixtures: &[Fixture]) -> Vec<Outcome> {
    fixtures.iter().map(|f| replay(dir, f)).collect()
}

pub fn run(dir: &Path, bless: bool, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let manifest_path = dir.join("manifest.txt");
    let text = match std::fs::read_to_string(&manifest_path) {
        Ok(t) => t,
        Err(_) => {
            say!(stderr, "warning: no manifest at {}; nothing to verify", manifest_path.display());
            return crate::cli::EXIT_CLEAN;
        }
    };
    let fixtures = match parse_manifest(&text) {
        Ok(f) => f,
        Err(msg) => {
            say!(stderr, "error: {}: {msg}", manifest_path.display());
            return crate::cli::EXIT_USAGE;
        }
    };
    if fixtures.is_empty() {
        say!(stderr, "warning: manifest at {} lists no fixtures", manifest_path.display());
        return crate::cli::EXIT_CLEAN;
    }

    let mut outcomes = replay_all(dir, &fixtures);
    outcomes.sort_by(|a, b| a.name.cmp(&b.name));

    if bless {
        for o in &outcomes {
            let golden = dir.join("golden").join(&o.name);
            if let Err(e) = std::fs::create_dir_all(&golden)
                .and_then(|()| std::fs::write(golden.join("out.txt"), &o.stdout))
                .and_then(|()| std::fs::write(golden.join("exit"), o.exit.to_string()))
            {
                say!(stderr, "error: cannot write golden for `{}`: {e}", o.name);
                return crate::cli::EXIT_USAGE;
            }
            say!(stdout, "{}: blessed (exit {})", o.name, o.exit);
        }
        return crate::cli::EXIT_CLEAN;
    }

    let mut failures = 0;
    for o in &outcomes {
        match first_difference(dir, o) {
            None => say!(stdout, "{}: ok", o.name),
            Some(why) => {
                failures += 1;
                say!(stdout, "{}: FAIL — {why}", o.name);
            }
        }
    }
    say!(stdout, "{} fixture(s), {failures} mismatch(es)", outcomes.len());
    if failures == 0 {
        crate::cli::EXIT_CLEAN
    } else {
        crate::cli::EXIT_FINDINGS
    }
}

/// The first way a replayed fixture differs from its golden, if any.
fn first_difference(dir: &Path, o: &Outcome) -> Option<String> {
    let golden = dir.join("golden").join(&o.name);
    let want_out = match std::fs::read(golden.join("out.txt")) {
        Ok(b) => b,
        Err(_) => return Some("missing golden files (record them with --bless)".into()),
    };
    let want_exit = std::fs::read_to_string(golden.join("exit"))
        .ok()
        .and_then(|s| s.trim().parse::<i32>().ok());
    let Some(want_exit) = want_exit else {
        return Some("golden exit file is missing or not an integer".into());
    };
    if o.stdout != want_out {
        return Some(describe_text_diff(&o.stdout, &want_out));
    }
    if o.exit != want_exit {
        return Some(format!("exit code differs: got {}, want {want_exit}", o.exit));
    }
    None
}

fn describe_text_diff(got: &[u8], want: &[u8]) -> String {
    let got = String::from_utf8_lossy(got);
    let want = String::from_utf8_lossy(want);
    let mut gl = got.lines();
    let mut wl = want.lines();
    let mut lineno = 0;
    loop {
        lineno += 1;
        match (gl.next(), wl.next()) {
            (None, None) => return "stdout differs only in trailing bytes".into(),
            (g, w) if g == w => continue,
            (g, w) => {
                let show =
                    |x: Option<&str>| x.map_or("<end of output>".into(), |s| format!("{s:?}"));
                return format!(
                    "stdout differs at line {lineno}: got {}, want {}",
                    show(g),
                    show(w)
                );
            }
        }
    }
}
