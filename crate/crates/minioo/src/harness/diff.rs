//! Differential search: run two entry functions over every small input
//! and report the first place they disagree.
//!
//! Inputs are collections manufactured by a zero-argument factory and
//! filled element by element. Filling follows a small convention: if the
//! factory's value has a one-argument `put` method we call it (mutating
//! collections), otherwise a two-argument free function `put` must exist
//! and return the grown collection (persistent collections). Elements are
//! drawn from [`multiset::enumerate`], so each argument ranges over all
//! multisets of the universe up to the size bound, and argument tuples
//! are visited in lexicographic product order — the leftmost argument
//! varies slowest. The first differing tuple is therefore deterministic
//! regardless of how the scan is scheduled.
//!
//! "Differ" compares everything a caller could observe: the structural
//! snapshot of the result (or the error label), printed lines, and failed
//! assertions. Runtime errors raised *inside* an entry are outcomes to
//! compare, not failures of the search; only the input-building
//! machinery itself erroring aborts.

use crate::harness::multiset::{self, Multiset};
use crate::harness::snapshot::OutcomeSnap;
use crate::interp::{Session, Value};
use crate::resolve::ResolvedProgram;
use std::fmt;

#[derive(Clone, Debug)]
pub struct DiffSpec {
    pub entry_a: String,
    pub entry_b: String,
    pub factory: String,
    pub universe: Vec<i64>,
    pub max_size: usize,
}

#[derive(Clone, Debug)]
pub enum DiffError {
    /// An entry or factory name doesn't resolve, or the entries' arities
    /// disagree. The program can't be searched as configured.
    Resolve(String),
    /// The put convention doesn't apply to the factory's values.
    Config(String),
    /// The factory or `put` raised while building inputs.
    Runtime(String),
}

impl fmt::Display for DiffError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffError::Resolve(m) | DiffError::Config(m) | DiffError::Runtime(m) => {
                write!(f, "{m}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// Position in the enumeration (0-based) where the entries diverged.
    pub index: usize,
    pub args: Vec<Multiset>,
    pub out_a: OutcomeSnap,
    pub out_b: OutcomeSnap,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "args (")?;
        for (i, ms) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", multiset::render(ms))?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug)]
pub struct SearchReport {
    /// Shared arity of the two entries.
    pub arity: usize,
    /// Parameter names of the first entry, for labeling witnesses.
    pub arg_names: Vec<String>,
    /// Candidate collections per argument position.
    pub candidates: usize,
    /// Total tuples scanned (candidates ^ arity) when no witness exists;
    /// with a witness the scan still establishes everything before it
    /// agrees.
    pub tuples: usize,
    pub witness: Option<Witness>,
}

pub fn differential_search(
    prog: &ResolvedProgram,
    spec: &DiffSpec,
) -> Result<SearchReport, DiffError> {
    search(prog, spec, true)
}

/// Single-threaded scan, kept callable alongside the parallel one so the
/// two can be benchmarked against each other.
pub fn differential_search_sequential(
    prog: &ResolvedProgram,
    spec: &DiffSpec,
) -> Result<SearchReport, DiffError> {
    search(prog, spec, false)
}

fn search(
    prog: &ResolvedProgram,
    spec: &DiffSpec,
    parallel: bool,
) -> Result<SearchReport, DiffError> {
    let arity = validate(prog, spec)?;
    let candidates = multiset::enumerate(&spec.universe, spec.max_size);
    let tuples = candidates.len().checked_pow(arity as u32).ok_or_else(|| {
        DiffError::Config(format!(
            "search space overflows: {} collections ^ {arity} arguments",
            candidates.len()
        ))
    })?;
    let probe = |index: usize| -> Option<Result<Witness, DiffError>> {
        let args: Vec<&Multiset> =
            decode(index, arity, candidates.len()).into_iter().map(|i| &candidates[i]).collect();
        match try_tuple(prog, spec, index, &args) {
            Ok(None) => None,
            Ok(Some(w)) => Some(Ok(w)),
            Err(e) => Some(Err(e)),
        }
    };
    let hit = if parallel { scan_parallel(tuples, &probe) } else { (0..tuples).find_map(probe) };
    let witness = hit.transpose()?;
    let arg_names = prog
        .fun_decl(&spec.entry_a)
        .expect("validated above")
        .params
        .iter()
        .map(|p| p.name.name.clone())
        .collect();
    Ok(SearchReport { arity, arg_names, candidates: candidates.len(), tuples, witness })
}

#[cfg(feature = "parallel")]
fn scan_parallel<F>(tuples: usize, probe: &F) -> Option<Result<Witness, DiffError>>
where
    F: Fn(usize) -> Option<Result<Witness, DiffError>> + Sync,
{
    use rayon::prelude::*;
    // find_map_first keeps the enumeration-order guarantee: whatever the
    // thread schedule, the reported hit is the earliest index.
    (0..tuples).into_par_iter().find_map_first(probe)
}

#[cfg(not(feature = "parallel"))]
fn scan_parallel<F>(tuples: usize, probe: &F) -> Option<Result<Witness, DiffError>>
where
    F: Fn(usize) -> Option<Result<Witness, DiffError>> + Sync,
{
    (0..tuples).find_map(probe)
}

fn validate(prog: &ResolvedProgram, spec: &DiffSpec) -> Result<usize, DiffError> {
    let lookup = |name: &str| {
        prog.fun_decl(name)
            .ok_or_else(|| DiffError::Resolve(format!("`{name}` is not a declared function")))
    };
    let a = lookup(&spec.entry_a)?;
    let b = lookup(&spec.entry_b)?;
    if a.params.len() != b.params.len() {
        return Err(DiffError::Resolve(format!(
            "entries disagree on arity: `{}` takes {}, `{}` takes {}",
            spec.entry_a,
            a.params.len(),
            spec.entry_b,
            b.params.len()
        )));
    }
    let factory = lookup(&spec.factory)?;
    if !factory.params.is_empty() {
        return Err(DiffError::Resolve(format!(
            "factory `{}` must take no parameters",
            spec.factory
        )));
    }
    Ok(a.params.len())
}

/// Row-major decode: index 0 is (first, first, …), and the rightmost
/// argument advances fastest.
fn decode(index: usize, arity: usize, base: usize) -> Vec<usize> {
    let mut digits = vec![0; arity];
    let mut rem = index;
    for slot in digits.iter_mut().rev() {
        *slot = rem % base;
        rem /= base;
    }
    digits
}

fn try_tuple(
    prog: &ResolvedProgram,
    spec: &DiffSpec,
    index: usize,
    args: &[&Multiset],
) -> Result<Option<Witness>, DiffError> {
    let out_a = run_entry(prog, spec, &spec.entry_a, args)?;
    let out_b = run_entry(prog, spec, &spec.entry_b, args)?;
    if out_a == out_b {
        return Ok(None);
    }
    Ok(Some(Witness { index, args: args.iter().map(|ms| (*ms).clone()).collect(), out_a, out_b }))
}

fn run_entry(
    prog: &ResolvedProgram,
    spec: &DiffSpec,
    entry: &str,
    arg_sets: &[&Multiset],
) -> Result<OutcomeSnap, DiffError> {
    let mut session = Session::new(prog);
    let mut args = Vec::with_capacity(arg_sets.len());
    for ms in arg_sets {
        args.push(build_collection(prog, &mut session, &spec.factory, ms)?);
    }
    // Observation starts at the entry call; anything the factory printed
    // is scaffolding, not outcome.
    let printed_from = session.output.len();
    let asserts_from = session.assertions_failed.len();
    let result = session.call(entry, args);
    Ok(OutcomeSnap::capture(prog, &session, &result, printed_from, asserts_from))
}

/// Manufacture one collection holding exactly `elems`.
pub fn build_collection(
    prog: &ResolvedProgram,
    session: &mut Session<'_>,
    factory: &str,
    elems: &Multiset,
) -> Result<Value, DiffError> {
    let mut v = session
        .call(factory, Vec::new())
        .map_err(|e| DiffError::Runtime(format!("factory `{factory}` failed: {e}")))?;
    for &e in elems {
        v = put_element(prog, session, factory, v, e)?;
    }
    Ok(v)
}

pub(crate) fn put_element(
    prog: &ResolvedProgram,
    session: &mut Session<'_>,
    factory: &str,
    v: Value,
    e: i64,
) -> Result<Value, DiffError> {
    let method_class = session
        .class_of(&v)
        .filter(|c| matches!(prog.method_in(c, "put"), Some((_, m)) if m.params.len() == 1))
        .map(str::to_string);
    if let Some(class) = method_class {
        session.call_method_host(&v, "put", vec![Value::Int(e)]).map_err(|err| {
            DiffError::Runtime(format!("`{class}::put` failed while building input: {err}"))
        })?;
        return Ok(v);
    }
    if let Some(f) = prog.fun_decl("put") {
        if f.params.len() == 2 {
            return session.call("put", vec![v, Value::Int(e)]).map_err(|err| {
                DiffError::Runtime(format!("`put` failed while building input: {err}"))
            });
        }
    }
    Err(DiffError::Config(format!(
        "values from factory `{factory}` have no one-argument `put` method, \
         and no two-argument free function `put` exists"
    )))
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

    fn spec(a: &str, b: &str, factory: &str, universe: &[i64], max_size: usize) -> DiffSpec {
        DiffSpec {
            entry_a: a.into(),
            entry_b: b.into(),
            factory: factory.into(),
            universe: universe.to_vec(),
            max_size,
        }
    }

    // A mutable box with a `put` method, plus entries that agree except
    // when the box holds exactly two elements.
    const BOX_SRC: &str = "class Box {\n  public:\n    list xs;\n    unit put(int e) { xs = cons(e, xs); }\n    int size() {\n      let n = 0;\n      let it = xs;\n      while (!is_nil(it)) { n = n + 1; it = tail(it); }\n      return n;\n    }\n  Box() : xs(nil) {}\n}\nBox make_box() { return new Box(); }\nint measure(Box b) { return b.size(); }\nint measure_quirky(Box b) {\n  if (b.size() == 2) { return 99; }\n  return b.size();\n}";

    // Persistent lists grown through a free `put`.
    const LIST_SRC: &str = "list make_plain() { return nil; }\nlist put(list xs, int e) { return cons(e, xs); }\nbool always(list xs) { return true; }\nbool never_two(list xs) {\n  if (is_nil(xs)) { return true; }\n  return is_nil(tail(xs));\n}";

    #[test]
    fn identical_entries_produce_no_witness() {
        let prog = resolved(BOX_SRC);
        let report =
            differential_search(&prog, &spec("measure", "measure", "make_box", &[1, 2], 2))
                .unwrap();
        assert_eq!(report.candidates, 6);
        assert_eq!(report.tuples, 6);
        assert!(report.witness.is_none());
    }

    #[test]
    fn first_divergence_in_enumeration_order_wins() {
        let prog = resolved(BOX_SRC);
        let report =
            differential_search(&prog, &spec("measure", "measure_quirky", "make_box", &[1, 2], 2))
                .unwrap();
        let w = report.witness.expect("size-2 boxes diverge");
        // Enumeration: {}, {1}, {2}, {1 1}, {1 2}, {2 2} — the first
        // two-element multiset is {1 1} at index 3.
        assert_eq!(w.index, 3);
        assert_eq!(w.args, vec![vec![1, 1]]);
        assert_ne!(w.out_a, w.out_b);
    }

    #[test]
    fn free_put_grows_persistent_collections() {
        let prog = resolved(LIST_SRC);
        let report =
            differential_search(&prog, &spec("always", "never_two", "make_plain", &[1, 2], 2))
                .unwrap();
        let w = report.witness.expect("two-element lists diverge");
        assert_eq!(w.args, vec![vec![1, 1]]);
    }

    #[test]
    fn multi_argument_tuples_scan_row_major() {
        assert_eq!(decode(0, 3, 6), vec![0, 0, 0]);
        assert_eq!(decode(1, 3, 6), vec![0, 0, 1]);
        assert_eq!(decode(6, 3, 6), vec![0, 1, 0]);
        assert_eq!(decode(215, 3, 6), vec![5, 5, 5]);
    }

    #[test]
    fn arity_mismatch_is_a_resolve_error() {
        let prog = resolved(&format!("{BOX_SRC}\nint nullary() {{ return 0; }}"));
        let err = differential_search(&prog, &spec("measure", "nullary", "make_box", &[1], 1))
            .unwrap_err();
        assert!(matches!(err, DiffError::Resolve(_)), "{err}");
    }

    #[test]
    fn missing_put_convention_is_a_config_error() {
        let prog = resolved("int make_plain() { return 7; }\nint id(int x) { return x; }");
        let err = differential_search(&prog, &spec("id", "id", "make_plain", &[1], 1)).unwrap_err();
        assert!(matches!(err, DiffError::Config(_)), "{err}");
    }

    #[test]
    fn entry_runtime_errors_are_outcomes_not_failures() {
        let src = format!(
            "{BOX_SRC}\nint calm(Box b) {{ return 0; }}\nint crashy(Box b) {{ return head(nil); }}"
        );
        let prog = resolved(&src);
        let report =
            differential_search(&prog, &spec("calm", "crashy", "make_box", &[1], 1)).unwrap();
        let w = report.witness.expect("crashy always diverges");
        assert_eq!(w.index, 0);
        assert_eq!(w.out_b.result, Err("head-of-nil".into()));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_and_sequential_scans_agree() {
        let prog = resolved(BOX_SRC);
        let s = spec("measure", "measure_quirky", "make_box", &[1, 2], 2);
        let par = differential_search(&prog, &s).unwrap();
        let seq = differential_search_sequential(&prog, &s).unwrap();
        assert_eq!(par.witness, seq.witness);
    }
}
