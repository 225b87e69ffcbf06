//! Command-line front door. Every subcommand goes through [`run_with`],
//! which takes explicit argument, output, and working-directory handles —
//! the corpus verifier replays fixture command lines through the same
//! path, so `minioo check …` behaves identically whether typed in a shell
//! or read from a manifest.
//!
//! Exit codes are part of the interface:
//!
//! | code | meaning                                                |
//! |------|--------------------------------------------------------|
//! | 0    | clean: no findings, verdict substitutable, laws hold   |
//! | 1    | findings: violations, failed contract, witness, or     |
//! |      | golden mismatch                                        |
//! | 2    | the program itself is bad: lex/parse/resolve error, no |
//! |      | `main`, or a named function/class doesn't exist        |
//! | 3    | the invocation is bad: flags, suite file, conventions  |
//! | 4    | a runtime error escaped the interpreted program        |

use crate::check::{self, CheckConfig, RuleId};
use crate::corpusck;
use crate::harness::diff::{differential_search, DiffError, DiffSpec};
use crate::harness::iso::{check_isomorphism, UfEncoding};
use crate::harness::multiset;
use crate::harness::suite::{parse_suite, substitution_json, substitution_test, validate_suite};
use crate::interp::Session;
use crate::parser::load_program;
use crate::resolve::{resolve, ResolvedProgram};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_LANGUAGE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

/// `writeln!` into a sink we don't control; a failed write (closed pipe)
/// must not turn into a panic mid-report.
macro_rules! say {
    ($dst:expr, $($arg:tt)*) => {{ let _ = writeln!($dst, $($arg)*); }};
}

#[derive(Parser)]
#[command(
    name = "minioo",
    version,
    about = "MiniOO workbench: subclassing-rule checker, interpreter, and behavioral harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check sources against the subclassing rules
    Check {
        /// .moo sources, concatenated in argument order
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Comma-separated subset of r1,r2,r3,r4, or `all`
        #[arg(long, default_value = "all")]
        rules: String,
        /// Flavor of the mutation rule: `strict` rejects every assignment,
        /// `relaxed` only mutation reaching arguments
        #[arg(long, value_enum, default_value_t = Form::Strict)]
        form: Form,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Run a program's `main`
    Run {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Run a contract suite under its own factory and a candidate factory
    Subst {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Suite file: `base`, `factory`, and `case` directives
        #[arg(long)]
        suite: PathBuf,
        /// Candidate factory whose values should honor the suite
        #[arg(long)]
        factory: String,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Search exhaustively for inputs on which two entry functions diverge
    Diff {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        entry_a: String,
        #[arg(long)]
        entry_b: String,
        /// Zero-argument factory producing an empty collection
        #[arg(long)]
        factory: String,
        /// Elements collections are filled from
        #[arg(long, default_value = "1,2")]
        universe: String,
        /// Largest collection size to try
        #[arg(long, default_value_t = 2)]
        max_size: usize,
    },
    /// Verify the bag/integer isomorphism laws exhaustively
    Iso {
        #[arg(long, default_value = "42,43")]
        universe: String,
        #[arg(long, default_value_t = 3)]
        max_size: usize,
        /// How elements become integer codes
        #[arg(long, value_enum, default_value_t = Coding::Identity)]
        codes: Coding,
    },
    /// Re-run every fixture in a corpus directory against its goldens
    CorpusVerify {
        dir: PathBuf,
        /// Rewrite the goldens from current behavior instead of comparing
        #[arg(long)]
        bless: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Strict,
    Relaxed,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Coding {
    /// Elements are their own codes (they must be >1, squarefree, coprime)
    Identity,
    /// The i-th smallest element gets the i-th prime
    Primes,
}

/// Parse `args` (without the program name) and run one subcommand.
/// Relative paths resolve against `base_dir`; reports go to `stdout`,
/// errors and warnings to `stderr`.
pub fn run_with(
    args: &[String],
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    base_dir: &Path,
) -> i32 {
    let argv = std::iter::once("minioo".to_string()).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_CLEAN
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    // Flags are validated before any file is read, so a bad flag reports
    // the same way whether or not the inputs exist.
    match cli.command {
        Cmd::Check { files, rules, form, format } => {
            let config = match rule_config(&rules, form) {
                Ok(c) => c,
                Err(msg) => {
                    say!(stderr, "error: {msg}");
                    return EXIT_USAGE;
                }
            };
            let prog = match load(&files, base_dir, stderr) {
                Ok(p) => p,
                Err(code) => return code,
            };
            cmd_check(&prog, &config, format, stdout)
        }
        Cmd::Run { files } => {
            let prog = match load(&files, base_dir, stderr) {
                Ok(p) => p,
                Err(code) => return code,
            };
            cmd_run(&prog, stdout, stderr)
        }
        Cmd::Subst { files, suite, factory, format } => {
            let prog = match load(&files, base_dir, stderr) {
                Ok(p) => p,
                Err(code) => return code,
            };
            cmd_subst(&prog, &base_dir.join(suite), &factory, format, stdout, stderr)
        }
        Cmd::Diff { files, entry_a, entry_b, factory, universe, max_size } => {
            let universe = match parse_universe(&universe) {
                Ok(u) => u,
                Err(msg) => {
                    say!(stderr, "error: {msg}");
                    return EXIT_USAGE;
                }
            };
            let prog = match load(&files, base_dir, stderr) {
                Ok(p) => p,
                Err(code) => return code,
            };
            cmd_diff(&prog, &entry_a, &entry_b, &factory, universe, max_size, stdout, stderr)
        }
        Cmd::Iso { universe, max_size, codes } => {
            cmd_iso(&universe, max_size, codes, stdout, stderr)
        }
        Cmd::CorpusVerify { dir, bless } => {
            corpusck::run(&base_dir.join(dir), bless, stdout, stderr)
        }
    }
}

/// Read, concatenate, parse, and resolve the input files. Diagnostics
/// carry the paths as given on the command line, so reports don't depend
/// on where the process happens to run.
fn load(
    files: &[PathBuf],
    base_dir: &Path,
    stderr: &mut dyn Write,
) -> Result<ResolvedProgram, i32> {
    let mut sources = Vec::new();
    for f in files {
        match std::fs::read_to_string(base_dir.join(f)) {
            Ok(text) => sources.push((f.display().to_string(), text)),
            Err(e) => {
                say!(stderr, "error: cannot read `{}`: {e}", f.display());
                return Err(EXIT_USAGE);
            }
        }
    }
    let program = load_program(&sources).map_err(|e| {
        say!(stderr, "{e}");
        EXIT_LANGUAGE
    })?;
    resolve(program).map_err(|errors| {
        for e in errors {
            say!(stderr, "{e}");
        }
        EXIT_LANGUAGE
    })
}

fn cmd_check(
    prog: &ResolvedProgram,
    config: &CheckConfig,
    format: OutputFormat,
    stdout: &mut dyn Write,
) -> i32 {
    let diags = check::check_all(prog, config);
    match format {
        OutputFormat::Text => {
            for d in &diags {
                say!(stdout, "{d}");
            }
            say!(
                stdout,
                "{} rule(s) checked, {} violation(s)",
                config.enabled().count(),
                diags.len()
            );
        }
        OutputFormat::Json => {
            let doc = check::diagnostics_json(&diags, config);
            say!(
                stdout,
                "{}",
                serde_json::to_string_pretty(&doc).expect("diagnostics are plain data")
            );
        }
    }
    if diags.is_empty() {
        EXIT_CLEAN
    } else {
        EXIT_FINDINGS
    }
}

/// Translate the `--rules`/`--form` pair into a checker configuration.
/// `r3` means the strict or relaxed mutation rule depending on the form.
pub fn rule_config(rules: &str, form: Form) -> Result<CheckConfig, String> {
    if rules == "all" {
        return Ok(match form {
            Form::Strict => CheckConfig::all_strict(),
            Form::Relaxed => CheckConfig::all_relaxed(),
        });
    }
    let mut chosen = Vec::new();
    for tok in rules.split(',') {
        chosen.push(match tok.trim() {
            "r1" => RuleId::R1NoVirtual,
            "r2" => RuleId::R2OpaqueExports,
            "r3" => match form {
                Form::Strict => RuleId::R3SNoMutation,
                Form::Relaxed => RuleId::R3RNoArgMutation,
            },
            "r4" => RuleId::R4CtorDelegation,
            other => {
                return Err(format!("unknown rule `{other}` (expected r1, r2, r3, r4, or all)"))
            }
        });
    }
    CheckConfig::new(chosen)
}

fn cmd_run(prog: &ResolvedProgram, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match prog.fun_decl("main") {
        None => {
            say!(stderr, "error: program has no `main` function");
            return EXIT_LANGUAGE;
        }
        Some(f) if !f.params.is_empty() => {
            say!(stderr, "error: `main` must take no parameters");
            return EXIT_LANGUAGE;
        }
        Some(_) => {}
    }
    let mut session = Session::new(prog);
    let result = session.call("main", Vec::new());
    for line in &session.output {
        say!(stdout, "{line}");
    }
    for span in &session.assertions_failed {
        say!(stdout, "assertion failed at {span}");
    }
    match result {
        Err(e) => {
            say!(stderr, "{e}");
            EXIT_RUNTIME
        }
        Ok(_) if session.assertions_failed.is_empty() => EXIT_CLEAN,
        Ok(_) => EXIT_FINDINGS,
    }
}

fn cmd_subst(
    prog: &ResolvedProgram,
    suite_path: &Path,
    factory: &str,
    format: OutputFormat,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let text = match std::fs::read_to_string(suite_path) {
        Ok(t) => t,
        Err(e) => {
            say!(stderr, "error: cannot read `{}`: {e}", suite_path.display());
            return EXIT_USAGE;
        }
    };
    let suite = match parse_suite(&text) {
        Ok(s) => s,
        Err(e) => {
            say!(stderr, "error: {}: {e}", suite_path.display());
            return EXIT_USAGE;
        }
    };
    // Names that don't resolve are a program problem (exit 2); anything
    // substitution_test still rejects after this is a configuration
    // problem (exit 3).
    if let Err(msg) = validate_suite(prog, &suite, factory) {
        say!(stderr, "error: {msg}");
        return EXIT_LANGUAGE;
    }
    let report = match substitution_test(prog, &suite, factory) {
        Ok(r) => r,
        Err(msg) => {
            say!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    match format {
        OutputFormat::Text => {
            say!(
                stdout,
                "suite for {}: factory {} vs candidate {}",
                suite.base_class,
                report.base_factory,
                report.derived_factory
            );
            for c in &report.cases {
                say!(stdout, "  {}: base {}, candidate {}", c.name, c.base, c.derived);
            }
            let broken =
                report.cases.iter().filter(|c| c.base.passed() && !c.derived.passed()).count();
            if report.substitutable {
                say!(stdout, "verdict: substitutable");
            } else {
                say!(
                    stdout,
                    "verdict: not substitutable ({broken} case(s) pass under the base but fail under the candidate)"
                );
            }
        }
        OutputFormat::Json => {
            let doc = substitution_json(&report);
            say!(stdout, "{}", serde_json::to_string_pretty(&doc).expect("report is plain data"));
        }
    }
    if report.substitutable {
        EXIT_CLEAN
    } else {
        EXIT_FINDINGS
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_diff(
    prog: &ResolvedProgram,
    entry_a: &str,
    entry_b: &str,
    factory: &str,
    universe: Vec<i64>,
    max_size: usize,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let spec = DiffSpec {
        entry_a: entry_a.to_string(),
        entry_b: entry_b.to_string(),
        factory: factory.to_string(),
        universe,
        max_size,
    };
    let report = match differential_search(prog, &spec) {
        Ok(r) => r,
        Err(DiffError::Resolve(msg)) => {
            say!(stderr, "error: {msg}");
            return EXIT_LANGUAGE;
        }
        Err(DiffError::Config(msg)) => {
            say!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
        Err(DiffError::Runtime(msg)) => {
            say!(stderr, "error: {msg}");
            return EXIT_RUNTIME;
        }
    };
    match &report.witness {
        None => {
            say!(
                stdout,
                "no divergence: {} vs {} agree on all {} tuple(s) ({} collections per argument)",
                entry_a,
                entry_b,
                report.tuples,
                report.candidates
            );
            EXIT_CLEAN
        }
        Some(w) => {
            say!(stdout, "divergence at tuple {} of {}:", w.index + 1, report.tuples);
            for (name, ms) in report.arg_names.iter().zip(&w.args) {
                say!(stdout, "  {name} = {}", multiset::render(ms));
            }
            say!(stdout, "{entry_a}: {}", w.out_a);
            say!(stdout, "{entry_b}: {}", w.out_b);
            EXIT_FINDINGS
        }
    }
}

fn cmd_iso(
    universe: &str,
    max_size: usize,
    codes: Coding,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let universe = match parse_universe(universe) {
        Ok(u) => u,
        Err(msg) => {
            say!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let enc = match codes {
        Coding::Identity => UfEncoding::identity(&universe),
        Coding::Primes => UfEncoding::primes(&universe),
    };
    let enc = match enc {
        Ok(e) => e,
        Err(msg) => {
            say!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let report = match check_isomorphism(&enc, &universe, max_size) {
        Ok(r) => r,
        Err(msg) => {
            say!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    for law in &report.laws {
        say!(
            stdout,
            "{}: {} case(s), {} counterexample(s)",
            law.name,
            law.cases,
            law.counterexamples.len()
        );
        for c in &law.counterexamples {
            say!(stdout, "  {c}");
        }
    }
    if report.all_hold() {
        EXIT_CLEAN
    } else {
        EXIT_FINDINGS
    }
}

fn parse_universe(csv: &str) -> Result<Vec<i64>, String> {
    let mut out = Vec::new();
    for tok in csv.split(',') {
        let tok = tok.trim();
        out.push(
            tok.parse::<i64>().map_err(|_| format!("`{tok}` in --universe is not an integer"))?,
        );
    }
    Ok(out)
}
