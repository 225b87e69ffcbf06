//! Dynamic cross-check of the mutation analysis.
//!
//! The analysis marks the argument positions through which a body *may*
//! mutate caller-visible state; soundness means everything it leaves
//! unmarked really is left alone. This module tests that empirically: for
//! every body with unmarked conduit positions it manufactures small
//! argument values, snapshots the unmarked ones, calls the body, and
//! snapshots again. Any difference is a soundness violation — either in
//! the analysis or in the interpreter.
//!
//! Candidate values are driven by the declared parameter types: ints and
//! bools range over small domains, lists over all multisets of the
//! universe up to the size bound, and objects come from zero-argument
//! constructors and zero-argument factory functions of any class on the
//! parameter's chain, optionally grown through the same `put` convention
//! the differential searcher uses. Bodies whose parameters we can't
//! manufacture are reported as skipped, never silently dropped.

use crate::ast::{Param, TypeRef};
use crate::check::mutation::{is_conduit, position_name, MutationSummaries};
use crate::harness::diff::put_element;
use crate::harness::multiset::{self, Multiset};
use crate::harness::snapshot::{snapshot, SnapValue};
use crate::interp::{Session, Value};
use crate::resolve::{BodyOwner, FnKey, ResolvedProgram};

/// One small recipe for a parameter value; realized per probe in a fresh
/// session.
#[derive(Clone, Debug)]
enum Candidate {
    Int(i64),
    Bool(bool),
    Unit,
    List(Multiset),
    Obj { maker: Maker, elems: Multiset },
}

#[derive(Clone, Debug)]
enum Maker {
    New(String),
    Call(String),
}

impl Maker {
    fn label(&self) -> String {
        match self {
            Maker::New(c) => format!("new {c}()"),
            Maker::Call(f) => format!("{f}()"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BodyProbe {
    pub key: String,
    /// Calls actually performed.
    pub probes_run: usize,
    /// Combinations abandoned because a value recipe failed at runtime.
    pub builds_failed: usize,
    /// Observed mutations of positions the analysis left unmarked.
    pub violations: Vec<String>,
    /// Set when the body could not be probed at all.
    pub skipped: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub bodies: Vec<BodyProbe>,
}

impl ProbeReport {
    pub fn sound(&self) -> bool {
        self.bodies.iter().all(|b| b.violations.is_empty())
    }

    pub fn total_probes(&self) -> usize {
        self.bodies.iter().map(|b| b.probes_run).sum()
    }
}

/// Upper bound on combinations per body; anything larger is reported as
/// skipped rather than ground through.
const MAX_COMBINATIONS: usize = 50_000;

pub fn probe_unmarked(
    prog: &ResolvedProgram,
    summaries: &MutationSummaries,
    universe: &[i64],
    max_size: usize,
) -> ProbeReport {
    let fills = multiset::enumerate(universe, max_size);
    let mut bodies = Vec::new();
    for (key, owner) in prog.bodies() {
        let Some(watch) = watched_positions(&key, &owner, summaries) else {
            continue;
        };
        bodies.push(probe_body(prog, &key, &owner, &watch, universe, &fills));
    }
    ProbeReport { bodies }
}

/// Unmarked conduit positions of a body, or `None` when there is nothing
/// to watch. Position 0 of a constructor is the object being born, not a
/// caller value, so it is never watched.
fn watched_positions(
    key: &FnKey,
    owner: &BodyOwner<'_>,
    summaries: &MutationSummaries,
) -> Option<Vec<usize>> {
    let marked = summaries.marked.get(key);
    let mut watch = Vec::new();
    let first = if owner.has_receiver() { 1 } else { 0 };
    if matches!(key, FnKey::Method(_, _)) {
        // The receiver is a conduit by nature.
        if marked.is_none_or(|m| !m.contains(&0)) {
            watch.push(0);
        }
    }
    for (i, p) in owner.params().iter().enumerate() {
        let pos = first + i;
        if is_conduit(p) && marked.is_none_or(|m| !m.contains(&pos)) {
            watch.push(pos);
        }
    }
    if watch.is_empty() {
        None
    } else {
        Some(watch)
    }
}

fn probe_body(
    prog: &ResolvedProgram,
    key: &FnKey,
    owner: &BodyOwner<'_>,
    watch: &[usize],
    universe: &[i64],
    fills: &[Multiset],
) -> BodyProbe {
    let mut out = BodyProbe {
        key: key.to_string(),
        probes_run: 0,
        builds_failed: 0,
        violations: Vec::new(),
        skipped: None,
    };

    // One candidate list per call slot: the receiver first for methods,
    // then the declared parameters.
    let mut slots: Vec<Vec<Candidate>> = Vec::new();
    if let FnKey::Method(class, _) = key {
        let recv = object_candidates(prog, class, fills);
        if recv.is_empty() {
            out.skipped = Some(format!("no way to manufacture a `{class}` receiver"));
            return out;
        }
        slots.push(recv);
    }
    for p in owner.params() {
        let cands = param_candidates(prog, p, universe, fills);
        if cands.is_empty() {
            out.skipped = Some(format!("no way to manufacture parameter `{}`", p.name.name));
            return out;
        }
        slots.push(cands);
    }

    let total: usize = slots.iter().map(Vec::len).product();
    if total > MAX_COMBINATIONS {
        out.skipped = Some(format!("{total} combinations exceed the probe budget"));
        return out;
    }

    for combo in 0..total.max(1) {
        let picks = decode_mixed(combo, &slots);
        match run_probe(prog, key, owner, watch, &picks) {
            Ok(violations) => {
                out.probes_run += 1;
                out.violations.extend(violations);
            }
            Err(_) => out.builds_failed += 1,
        }
    }
    if out.probes_run == 0 && total > 0 {
        out.skipped = Some("every value recipe failed at runtime".into());
    }
    out
}

fn decode_mixed<'a>(mut combo: usize, slots: &'a [Vec<Candidate>]) -> Vec<&'a Candidate> {
    let mut picks = Vec::with_capacity(slots.len());
    for slot in slots.iter().rev() {
        picks.push(&slot[combo % slot.len()]);
        combo /= slot.len();
    }
    picks.reverse();
    picks
}

/// Run one call and compare before/after snapshots of the watched
/// positions. `Err` means a value recipe failed, not the call itself —
/// runtime errors raised by the probed body are still completed probes.
fn run_probe(
    prog: &ResolvedProgram,
    key: &FnKey,
    owner: &BodyOwner<'_>,
    watch: &[usize],
    picks: &[&Candidate],
) -> Result<Vec<String>, String> {
    let mut session = Session::new(prog);
    let mut values = Vec::with_capacity(picks.len());
    for c in picks {
        values.push(realize(prog, &mut session, c)?);
    }

    // Positions are receiver-based. Methods carry the receiver in
    // values[0], so position and index coincide; free functions count
    // parameters from 0 either way. Constructors have no receiver slot —
    // their parameters start at position 1 but index 0 — and
    // watched_positions never asks for a constructor's position 0.
    let shift = if matches!(key, FnKey::Ctor(_, _)) { 1 } else { 0 };
    let value_at = |pos: usize| -> &Value { &values[pos - shift] };
    let before: Vec<SnapValue> =
        watch.iter().map(|&p| snapshot(prog, &session, value_at(p))).collect();

    let _ = match key {
        FnKey::Free(name) => session.call(name, values.clone()),
        FnKey::Method(_, name) => session.call_method_host(&values[0], name, values[1..].to_vec()),
        FnKey::Ctor(class, _) => session.construct(class, values.clone()),
    };

    let mut violations = Vec::new();
    for (&pos, old) in watch.iter().zip(&before) {
        let new = snapshot(prog, &session, value_at(pos));
        if new != *old {
            violations.push(format!(
                "{key}: unmarked position {pos} (`{}`) changed from {old} to {new}",
                position_name(owner, pos)
            ));
        }
    }
    Ok(violations)
}

fn param_candidates(
    prog: &ResolvedProgram,
    p: &Param,
    universe: &[i64],
    fills: &[Multiset],
) -> Vec<Candidate> {
    match &p.ty {
        TypeRef::Int => universe.iter().map(|&n| Candidate::Int(n)).collect(),
        TypeRef::Bool => vec![Candidate::Bool(false), Candidate::Bool(true)],
        TypeRef::Unit => vec![Candidate::Unit],
        TypeRef::List => fills.iter().cloned().map(Candidate::List).collect(),
        TypeRef::Class(c) => object_candidates(prog, c, fills),
    }
}

/// Every way we know to make an object usable where class `base` is
/// expected: direct zero-argument construction of `base` or a subclass,
/// and any zero-argument factory returning one. When the made class
/// supports the `put` convention, grown variants are included too.
fn object_candidates(prog: &ResolvedProgram, base: &str, fills: &[Multiset]) -> Vec<Candidate> {
    let mut makers: Vec<(Maker, String)> = Vec::new();
    for (name, info) in &prog.classes {
        if !info.chain.iter().any(|c| c == base) {
            continue;
        }
        if prog.ctor_of(name, 0).is_some() || prog.has_implicit_default_ctor(name) {
            makers.push((Maker::New(name.clone()), name.clone()));
        }
    }
    for decl in prog.bodies() {
        if let (FnKey::Free(name), BodyOwner::Free(f)) = (&decl.0, &decl.1) {
            if let TypeRef::Class(ret) = &f.ret {
                if f.params.is_empty()
                    && prog.classes.get(ret).is_some_and(|i| i.chain.iter().any(|c| c == base))
                {
                    makers.push((Maker::Call(name.clone()), ret.clone()));
                }
            }
        }
    }

    let has_free_put = prog.fun_decl("put").map(|f| f.params.len() == 2).unwrap_or(false);
    let mut cands = Vec::new();
    for (maker, class) in makers {
        let has_put = has_free_put
            || matches!(prog.method_in(&class, "put"), Some((_, m)) if m.params.len() == 1);
        if has_put {
            cands.extend(
                fills.iter().map(|m| Candidate::Obj { maker: maker.clone(), elems: m.clone() }),
            );
        } else {
            cands.push(Candidate::Obj { maker, elems: Vec::new() });
        }
    }
    cands
}

fn realize(
    prog: &ResolvedProgram,
    session: &mut Session<'_>,
    c: &Candidate,
) -> Result<Value, String> {
    use crate::interp::PList;
    match c {
        Candidate::Int(n) => Ok(Value::Int(*n)),
        Candidate::Bool(b) => Ok(Value::Bool(*b)),
        Candidate::Unit => Ok(Value::Unit),
        Candidate::List(ms) => {
            Ok(Value::List(PList::from_values(ms.iter().map(|&n| Value::Int(n)))))
        }
        Candidate::Obj { maker, elems } => {
            let label = maker.label();
            let mut v = match maker {
                Maker::New(class) => session.construct(class, Vec::new()),
                Maker::Call(f) => session.call(f, Vec::new()),
            }
            .map_err(|e| format!("{label} failed: {e}"))?;
            for &e in elems {
                v = put_element(prog, session, &label, v, e).map_err(|err| err.to_string())?;
            }
            Ok(v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::mutation::mutation_summaries;
    use crate::parser::{parse_file, IdGen};
    use crate::resolve::resolve;

    fn resolved(src: &str) -> ResolvedProgram {
        let mut ids = IdGen::default();
        resolve(parse_file(src, "t.moo", &mut ids).unwrap()).unwrap()
    }

    const SRC: &str = "class Cell {\n  public:\n    list xs;\n    unit put(int e) { xs = cons(e, xs); }\n    int size() {\n      let n = 0;\n      let it = xs;\n      while (!is_nil(it)) { n = n + 1; it = tail(it); }\n      return n;\n    }\n  Cell() : xs(nil) {}\n}\nCell make_cell() { return new Cell(); }\nint peek(constref Cell c) { return c.size(); }\nunit poke(ref Cell c) { c.put(3); }\nint total(list xs) {\n  let n = 0;\n  let it = xs;\n  while (!is_nil(it)) { n = n + head(it); it = tail(it); }\n  return n;\n}";

    #[test]
    fn clean_program_probes_clean() {
        let prog = resolved(SRC);
        let summaries = mutation_summaries(&prog);
        let report = probe_unmarked(&prog, &summaries, &[1, 2], 2);
        assert!(report.sound(), "{:#?}", report.bodies);
        assert!(report.total_probes() > 0);
        // `peek` and `total` are unmarked and therefore watched.
        assert!(report.bodies.iter().any(|b| b.key == "peek"));
        assert!(report.bodies.iter().any(|b| b.key == "total"));
        // `poke` mutates through its only conduit, so nothing is watched.
        assert!(!report.bodies.iter().any(|b| b.key == "poke"));
    }

    #[test]
    fn a_lying_summary_is_caught() {
        let prog = resolved(SRC);
        let mut summaries = mutation_summaries(&prog);
        // Pretend the analysis had not marked `poke`'s parameter.
        summaries.marked.clear();
        let report = probe_unmarked(&prog, &summaries, &[1, 2], 1);
        assert!(!report.sound());
        let poke = report.bodies.iter().find(|b| b.key == "poke").unwrap();
        assert!(poke.violations.iter().any(|v| v.contains("`c`")), "{:?}", poke.violations);
    }

    #[test]
    fn unmakeable_parameters_are_reported_as_skipped() {
        let prog = resolved(
            "class Opaque { Opaque(int secret) {} }\nint probe_me(constref Opaque o) { return 1; }",
        );
        let summaries = mutation_summaries(&prog);
        let report = probe_unmarked(&prog, &summaries, &[1], 1);
        let body = report.bodies.iter().find(|b| b.key == "probe_me").unwrap();
        assert!(body.skipped.is_some());
        assert_eq!(body.probes_run, 0);
    }

    #[test]
    fn constructor_arguments_are_watched_but_not_the_new_object() {
        let prog = resolved(
            "class Wrap {\n  public:\n    list xs;\n  Wrap(list seed) : xs(seed) {}\n}\nint use(int n) { return n; }",
        );
        let summaries = mutation_summaries(&prog);
        let report = probe_unmarked(&prog, &summaries, &[1], 1);
        let ctor = report.bodies.iter().find(|b| b.key == "Wrap::Wrap/1").unwrap();
        assert!(ctor.skipped.is_none());
        assert!(ctor.violations.is_empty(), "{:?}", ctor.violations);
    }
}
