//! Deep structural snapshots of interpreter values and call outcomes.
//!
//! A snapshot is a plain tree: object identity is dissolved into class
//! name plus field snapshots, so two structurally equal object graphs from
//! *different* sessions compare equal. That is exactly the equality the
//! differential search and the mutation probes need — "did the two runs
//! observe the same thing", not "is it the same heap cell".

use crate::interp::{RuntimeError, Session, Value};
use crate::resolve::ResolvedProgram;
use crate::span::Span;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SnapValue {
    Int(i64),
    Bool(bool),
    Unit,
    List(Vec<SnapValue>),
    Obj {
        class: String,
        fields: Vec<(String, SnapValue)>,
    },
    /// A declared field never written by any constructor.
    Uninitialized,
    /// Back-edge in the object graph.
    Cycle,
}

impl fmt::Display for SnapValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SnapValue::Int(n) => write!(f, "{n}"),
            SnapValue::Bool(b) => write!(f, "{b}"),
            SnapValue::Unit => write!(f, "()"),
            SnapValue::List(xs) => {
                write!(f, "[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
            SnapValue::Obj { class, fields } => {
                write!(f, "{class}{{")?;
                for (i, (name, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{name}: {v}")?;
                }
                write!(f, "}}")
            }
            SnapValue::Uninitialized => write!(f, "<uninitialized>"),
            SnapValue::Cycle => write!(f, "<cycle>"),
        }
    }
}

/// Snapshot a value against the session's object store.
pub fn snapshot(prog: &ResolvedProgram, session: &Session<'_>, v: &Value) -> SnapValue {
    snap(prog, session, v, &mut BTreeSet::new())
}

fn snap(
    prog: &ResolvedProgram,
    session: &Session<'_>,
    v: &Value,
    on_path: &mut BTreeSet<usize>,
) -> SnapValue {
    match v {
        Value::Int(n) => SnapValue::Int(*n),
        Value::Bool(b) => SnapValue::Bool(*b),
        Value::Unit => SnapValue::Unit,
        Value::List(l) => {
            SnapValue::List(l.iter().map(|e| snap(prog, session, e, on_path)).collect())
        }
        Value::Obj(o) => {
            if !on_path.insert(o.id) {
                return SnapValue::Cycle;
            }
            let data = session.store.get(o.id);
            let layout = &prog.classes[&data.class].layout;
            let fields = layout
                .iter()
                .zip(&data.fields)
                .map(|(info, slot)| {
                    let fv = match slot {
                        Some(v) => snap(prog, session, v, on_path),
                        None => SnapValue::Uninitialized,
                    };
                    (info.name.clone(), fv)
                })
                .collect();
            on_path.remove(&o.id);
            SnapValue::Obj { class: data.class.clone(), fields }
        }
    }
}

/// Everything observable about one function call: what it returned (or
/// how it failed), what it printed, and how many assertions failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeSnap {
    pub result: Result<SnapValue, String>,
    pub printed: Vec<String>,
    pub asserts_failed: Vec<String>,
}

impl OutcomeSnap {
    /// Capture a call's observables. `printed_from`/`asserts_from` mark
    /// where this call's share of the session log begins.
    pub fn capture(
        prog: &ResolvedProgram,
        session: &Session<'_>,
        result: &Result<Value, RuntimeError>,
        printed_from: usize,
        asserts_from: usize,
    ) -> OutcomeSnap {
        OutcomeSnap {
            result: match result {
                Ok(v) => Ok(snapshot(prog, session, v)),
                Err(e) => Err(e.kind.label().to_string()),
            },
            printed: session.output[printed_from..].to_vec(),
            asserts_failed: session.assertions_failed[asserts_from..]
                .iter()
                .map(Span::to_string)
                .collect(),
        }
    }
}

impl fmt::Display for OutcomeSnap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.result {
            Ok(v) => write!(f, "returned {v}")?,
            Err(label) => write!(f, "runtime error ({label})")?,
        }
        if !self.printed.is_empty() {
            write!(f, ", printed {} line(s)", self.printed.len())?;
        }
        if !self.asserts_failed.is_empty() {
            write!(f, ", {} failed assertion(s)", self.asserts_failed.len())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::Session;
    use crate::parser::{parse_file, IdGen};
    use crate::resolve::resolve;

    fn resolved(src: &str) -> ResolvedProgram {
        let mut ids = IdGen::default();
        resolve(parse_file(src, "t.moo", &mut ids).unwrap()).unwrap()
    }

    #[test]
    fn snapshots_dissolve_identity_into_structure() {
        let prog = resolved(
            "class P {\n  public:\n    int x;\n    list xs;\n  P(int v) : x(v), xs(cons(v, nil)) {}\n}\nP mk(int v) { return new P(v); }",
        );
        let mut s1 = Session::new(&prog);
        let v1 = s1.call("mk", vec![Value::Int(7)]).unwrap();
        let mut s2 = Session::new(&prog);
        let v2 = s2.call("mk", vec![Value::Int(7)]).unwrap();
        assert_eq!(snapshot(&prog, &s1, &v1), snapshot(&prog, &s2, &v2));
        let v3 = s2.call("mk", vec![Value::Int(8)]).unwrap();
        assert_ne!(snapshot(&prog, &s2, &v2), snapshot(&prog, &s2, &v3));
    }

    #[test]
    fn inherited_fields_appear_with_base_first_layout() {
        let prog = resolved(
            "class A { public: int a; A() : a(1) {} }\nclass B : A { public: int b; B() : A(), b(2) {} }\nB mk() { return new B(); }",
        );
        let mut s = Session::new(&prog);
        let v = s.call("mk", vec![]).unwrap();
        let SnapValue::Obj { class, fields } = snapshot(&prog, &s, &v) else {
            panic!("expected an object snapshot")
        };
        assert_eq!(class, "B");
        assert_eq!(fields, vec![("a".into(), SnapValue::Int(1)), ("b".into(), SnapValue::Int(2))]);
    }

    #[test]
    fn cyclic_object_graphs_terminate() {
        let prog = resolved(
            "class N {\n  public:\n    int v;\n  N() : v(0) {}\n  friend tie;\n  private:\n    N next;\n}\nN tie() {\n  let n = new N();\n  n.next = n;\n  return n;\n}",
        );
        let mut s = Session::new(&prog);
        let v = s.call("tie", vec![]).unwrap();
        let snap = snapshot(&prog, &s, &v);
        let text = snap.to_string();
        assert!(text.contains("<cycle>"), "{text}");
    }

    #[test]
    fn display_is_compact() {
        let v = SnapValue::Obj {
            class: "CBag".into(),
            fields: vec![("elems".into(), SnapValue::List(vec![SnapValue::Int(1)]))],
        };
        assert_eq!(v.to_string(), "CBag{elems: [1]}");
        assert_eq!(SnapValue::List(vec![]).to_string(), "[]");
    }
}
