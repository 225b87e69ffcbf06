//! Contract suites and the substitution test.
//!
//! A suite names a base class, a zero-argument factory producing the
//! reference value, and a list of cases. Each case is a MiniOO function of
//! one argument: it receives a freshly manufactured value, exercises some
//! promised behavior, and returns `true` if the promise held. Keeping the
//! cases in the interpreted language means the same suite text runs
//! unchanged against any factory — substitution is literally "same
//! program, different constructor".
//!
//! The substitution test runs the suite twice, under the suite's own
//! factory and under a candidate factory, and compares per case: the
//! candidate is substitutable when every case that passes under the base
//! also passes under the candidate. Cases the base itself fails don't
//! count against the candidate.
//!
//! Suite files are line-oriented:
//!
//! ```text
//! # comment
//! base CBag
//! factory make_cbag
//! case put_twice_counts fnb_case
//! ```

use crate::harness::snapshot::OutcomeSnap;
use crate::interp::{Session, Value};
use crate::resolve::ResolvedProgram;
use serde_json::json;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractCase {
    pub name: String,
    pub driver: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractSuite {
    pub base_class: String,
    pub factory_base: String,
    pub cases: Vec<ContractCase>,
}

#[derive(Clone, Debug)]
pub struct SuiteError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for SuiteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "suite line {}: {}", self.line, self.message)
    }
}

pub fn parse_suite(text: &str) -> Result<ContractSuite, SuiteError> {
    let mut base_class = None;
    let mut factory_base = None;
    let mut cases = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Err(SuiteError { line: lineno, message });
        let mut words = line.split_whitespace();
        let directive = words.next().expect("non-empty line");
        let rest: Vec<&str> = words.collect();
        match (directive, rest.as_slice()) {
            ("base", [name]) => {
                if base_class.replace(name.to_string()).is_some() {
                    return err("duplicate `base` directive".into());
                }
            }
            ("factory", [name]) => {
                if factory_base.replace(name.to_string()).is_some() {
                    return err("duplicate `factory` directive".into());
                }
            }
            ("case", [name, driver]) => {
                cases.push(ContractCase { name: name.to_string(), driver: driver.to_string() });
            }
            ("base", _) => return err("`base` takes exactly one class name".into()),
            ("factory", _) => return err("`factory` takes exactly one function name".into()),
            ("case", _) => return err("`case` takes a name and a driver function".into()),
            (other, _) => return err(format!("unknown directive `{other}`")),
        }
    }
    let Some(base_class) = base_class else {
        return Err(SuiteError { line: 0, message: "missing `base` directive".into() });
    };
    let Some(factory_base) = factory_base else {
        return Err(SuiteError { line: 0, message: "missing `factory` directive".into() });
    };
    Ok(ContractSuite { base_class, factory_base, cases })
}

/// Why names in a suite fail to match the loaded program — reported
/// before anything runs.
pub fn validate_suite(
    prog: &ResolvedProgram,
    suite: &ContractSuite,
    factory: &str,
) -> Result<(), String> {
    if !prog.classes.contains_key(&suite.base_class) {
        return Err(format!("suite base class `{}` is not declared", suite.base_class));
    }
    for name in [suite.factory_base.as_str(), factory] {
        match prog.fun_decl(name) {
            None => return Err(format!("factory `{name}` is not a declared function")),
            Some(f) if !f.params.is_empty() => {
                return Err(format!("factory `{name}` must take no parameters"))
            }
            Some(_) => {}
        }
    }
    for case in &suite.cases {
        match prog.fun_decl(&case.driver) {
            None => {
                return Err(format!(
                    "case `{}`: driver `{}` is not a declared function",
                    case.name, case.driver
                ))
            }
            Some(f) if f.params.len() != 1 => {
                return Err(format!(
                    "case `{}`: driver `{}` must take exactly one parameter",
                    case.name, case.driver
                ))
            }
            Some(_) => {}
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CaseStatus {
    Pass,
    Fail(String),
}

impl CaseStatus {
    pub fn passed(&self) -> bool {
        matches!(self, CaseStatus::Pass)
    }
}

impl fmt::Display for CaseStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseStatus::Pass => write!(f, "pass"),
            CaseStatus::Fail(note) => write!(f, "FAIL ({note})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CaseResult {
    pub name: String,
    pub status: CaseStatus,
}

/// Run every case as `driver(factory())`, each in a fresh session. A case
/// passes when the driver returns `true`, raises no runtime error, and
/// fails no assertion.
pub fn run_suite(prog: &ResolvedProgram, suite: &ContractSuite, factory: &str) -> Vec<CaseResult> {
    suite
        .cases
        .iter()
        .map(|case| CaseResult {
            name: case.name.clone(),
            status: run_case(prog, factory, &case.driver),
        })
        .collect()
}

fn run_case(prog: &ResolvedProgram, factory: &str, driver: &str) -> CaseStatus {
    let mut session = Session::new(prog);
    let value = match session.call(factory, Vec::new()) {
        Ok(v) => v,
        Err(e) => return CaseStatus::Fail(format!("factory failed: {e}")),
    };
    let result = session.call(driver, vec![value]);
    let snap = OutcomeSnap::capture(prog, &session, &result, 0, 0);
    match &snap.result {
        Err(label) => CaseStatus::Fail(format!("runtime error ({label})")),
        Ok(_) if !snap.asserts_failed.is_empty() => {
            CaseStatus::Fail(format!("{} assertion(s) failed", snap.asserts_failed.len()))
        }
        Ok(v) => match result {
            Ok(Value::Bool(true)) => CaseStatus::Pass,
            Ok(Value::Bool(false)) => CaseStatus::Fail("returned false".into()),
            _ => CaseStatus::Fail(format!("returned {v}, expected a boolean")),
        },
    }
}

#[derive(Clone, Debug)]
pub struct SubstCase {
    pub name: String,
    pub base: CaseStatus,
    pub derived: CaseStatus,
}

#[derive(Clone, Debug)]
pub struct SubstitutionReport {
    pub base_factory: String,
    pub derived_factory: String,
    pub cases: Vec<SubstCase>,
    pub substitutable: bool,
}

/// Run the suite under its own factory and under `derived_factory`.
///
/// The two factories must manufacture values whose classes share an
/// inheritance chain with the suite's base class (either direction, so a
/// bag can be probed against the set suite and vice versa); anything else
/// is a configuration error, not a verdict.
pub fn substitution_test(
    prog: &ResolvedProgram,
    suite: &ContractSuite,
    derived_factory: &str,
) -> Result<SubstitutionReport, String> {
    validate_suite(prog, suite, derived_factory)?;
    check_factory_class(prog, &suite.factory_base, &suite.base_class, true)?;
    check_factory_class(prog, derived_factory, &suite.base_class, false)?;
    let base = run_suite(prog, suite, &suite.factory_base);
    let derived = run_suite(prog, suite, derived_factory);
    let cases: Vec<SubstCase> = base
        .into_iter()
        .zip(derived)
        .map(|(b, d)| SubstCase { name: b.name, base: b.status, derived: d.status })
        .collect();
    let substitutable = cases.iter().all(|c| !c.base.passed() || c.derived.passed());
    Ok(SubstitutionReport {
        base_factory: suite.factory_base.clone(),
        derived_factory: derived_factory.to_string(),
        cases,
        substitutable,
    })
}

/// The base factory must produce exactly the base class; a candidate
/// factory may produce anything on the base class's chain.
fn check_factory_class(
    prog: &ResolvedProgram,
    factory: &str,
    base_class: &str,
    exact: bool,
) -> Result<(), String> {
    let mut session = Session::new(prog);
    let v = session
        .call(factory, Vec::new())
        .map_err(|e| format!("factory `{factory}` failed: {e}"))?;
    let Some(class) = session.class_of(&v) else {
        return Err(format!("factory `{factory}` did not produce an object"));
    };
    let related = class == base_class
        || prog.classes[class].chain.iter().any(|c| c == base_class)
        || prog.classes[base_class].chain.iter().any(|c| c == class);
    if exact && class != base_class {
        Err(format!(
            "suite factory `{factory}` produced `{class}`, expected the base class `{base_class}`"
        ))
    } else if !related {
        Err(format!(
            "factory `{factory}` produced `{class}`, which shares no chain with `{base_class}`"
        ))
    } else {
        Ok(())
    }
}

/// Structured report: `{"version": 1, "cases": [...], "verdict": "..."}`.
pub fn substitution_json(report: &SubstitutionReport) -> serde_json::Value {
    json!({
        "version": 1,
        "base_factory": report.base_factory,
        "derived_factory": report.derived_factory,
        "cases": report.cases.iter().map(|c| json!({
            "name": c.name,
            "base": status_json(&c.base),
            "derived": status_json(&c.derived),
        })).collect::<Vec<_>>(),
        "verdict": if report.substitutable { "substitutable" } else { "not-substitutable" },
    })
}

fn status_json(s: &CaseStatus) -> serde_json::Value {
    match s {
        CaseStatus::Pass => json!({"result": "pass"}),
        CaseStatus::Fail(note) => json!({"result": "fail", "note": note}),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_file, IdGen};
    use crate::resolve::resolve;

    fn resolved(src: &str) -> ResolvedProgram {
        let mut ids = IdGen::default();
        resolve(parse_file(src, "t.moo", &mut ids).unwrap()).unwrap()
    }

    const COUNTERS: &str = "class Counter {\n  public:\n    int n;\n    unit tick() { n = n + 1; }\n  Counter() : n(0) {}\n}\nclass Doubler : Counter {\n  public:\n    unit tick2() { tick(); tick(); }\n  Doubler() : Counter() {}\n}\nCounter make_counter() { return new Counter(); }\nDoubler make_doubler() { return new Doubler(); }\nbool starts_at_zero(Counter c) { return c.n == 0; }\nbool tick_increments(Counter c) {\n  c.tick();\n  return c.n == 1;\n}\nbool always_false(Counter c) { return false; }\nbool crashes(Counter c) { return head(nil) == 0; }\nbool asserts_wrongly(Counter c) {\n  assert(1 == 2);\n  return true;\n}";

    const SUITE: &str = "# counter contracts\nbase Counter\nfactory make_counter\ncase zero starts_at_zero\ncase tick tick_increments\n";

    #[test]
    fn parse_directives_and_comments() {
        let s = parse_suite(SUITE).unwrap();
        assert_eq!(s.base_class, "Counter");
        assert_eq!(s.factory_base, "make_counter");
        assert_eq!(s.cases.len(), 2);
        assert_eq!(s.cases[1].driver, "tick_increments");
    }

    #[test]
    fn parse_rejects_malformed_lines() {
        assert!(parse_suite("base A B\n").is_err());
        assert!(parse_suite("nonsense x\n").is_err());
        assert!(parse_suite("base A\n").is_err(), "missing factory");
        let e = parse_suite("base A\nbase B\nfactory f\n").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn cases_pass_fail_error_and_assert() {
        let prog = resolved(COUNTERS);
        let suite = ContractSuite {
            base_class: "Counter".into(),
            factory_base: "make_counter".into(),
            cases: vec![
                ContractCase { name: "zero".into(), driver: "starts_at_zero".into() },
                ContractCase { name: "no".into(), driver: "always_false".into() },
                ContractCase { name: "boom".into(), driver: "crashes".into() },
                ContractCase { name: "oops".into(), driver: "asserts_wrongly".into() },
            ],
        };
        let results = run_suite(&prog, &suite, "make_counter");
        assert!(results[0].status.passed());
        assert_eq!(results[1].status, CaseStatus::Fail("returned false".into()));
        assert!(matches!(&results[2].status, CaseStatus::Fail(n) if n.contains("head-of-nil")));
        assert!(matches!(&results[3].status, CaseStatus::Fail(n) if n.contains("assertion")));
    }

    #[test]
    fn each_case_gets_a_fresh_value() {
        let prog = resolved(COUNTERS);
        let suite = ContractSuite {
            base_class: "Counter".into(),
            factory_base: "make_counter".into(),
            cases: vec![
                ContractCase { name: "t1".into(), driver: "tick_increments".into() },
                ContractCase { name: "t2".into(), driver: "tick_increments".into() },
            ],
        };
        let results = run_suite(&prog, &suite, "make_counter");
        assert!(results.iter().all(|r| r.status.passed()), "{results:?}");
    }

    #[test]
    fn substitution_requires_related_factories() {
        let prog = resolved(&format!(
            "{COUNTERS}\nclass Alien {{ Alien() {{}} }}\nAlien make_alien() {{ return new Alien(); }}"
        ));
        let suite = parse_suite(SUITE).unwrap();
        let err = substitution_test(&prog, &suite, "make_alien").unwrap_err();
        assert!(err.contains("shares no chain"), "{err}");
        // ...but a subclass factory is fine, and passes everything here.
        let report = substitution_test(&prog, &suite, "make_doubler").unwrap();
        assert!(report.substitutable);
    }

    #[test]
    fn verdict_ignores_cases_the_base_already_fails() {
        let prog = resolved(COUNTERS);
        let mut suite = parse_suite(SUITE).unwrap();
        suite.cases.push(ContractCase { name: "no".into(), driver: "always_false".into() });
        let report = substitution_test(&prog, &suite, "make_doubler").unwrap();
        assert!(!report.cases[2].base.passed());
        assert!(!report.cases[2].derived.passed());
        assert!(report.substitutable, "a base-failing case is not the candidate's fault");
    }

    #[test]
    fn reflexive_substitution_matches_base_results() {
        let prog = resolved(COUNTERS);
        let mut suite = parse_suite(SUITE).unwrap();
        suite.cases.push(ContractCase { name: "no".into(), driver: "always_false".into() });
        let report = substitution_test(&prog, &suite, "make_counter").unwrap();
        for c in &report.cases {
            assert_eq!(c.base, c.derived, "case {}", c.name);
        }
        assert!(report.substitutable);
    }

    #[test]
    fn empty_suite_is_vacuously_substitutable() {
        let prog = resolved(COUNTERS);
        let suite = ContractSuite {
            base_class: "Counter".into(),
            factory_base: "make_counter".into(),
            cases: vec![],
        };
        let report = substitution_test(&prog, &suite, "make_doubler").unwrap();
        assert!(report.substitutable);
        assert!(report.cases.is_empty());
    }

    #[test]
    fn json_report_shape() {
        let prog = resolved(COUNTERS);
        let suite = parse_suite(SUITE).unwrap();
        let report = substitution_test(&prog, &suite, "make_doubler").unwrap();
        let doc = substitution_json(&report);
        assert_eq!(doc["version"], 1);
        assert_eq!(doc["verdict"], "substitutable");
        assert_eq!(doc["cases"].as_array().unwrap().len(), 2);
        assert_eq!(doc["cases"][0]["base"]["result"], "pass");
    }
}
