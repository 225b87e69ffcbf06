//! Interprocedural may-mutate analysis behind the relaxed mutation rule.
//!
//! Every callable body gets a summary: the set of argument positions
//! through which it may mutate caller-visible data. For methods and
//! constructors the receiver is position 0 and declared parameters start
//! at 1; free functions number their parameters from 0.
//!
//! Per body, a flow-insensitive pass computes which locals may alias data
//! arriving through which positions (`let es = to_list(from)` chains,
//! list heads, field reads). Direct events mark positions outright:
//! assigning a field of `this` marks 0, assigning through a `ref`
//! parameter's slot marks that parameter, assigning a field of an aliased
//! object marks whatever the alias may come from. Call events defer to the
//! callee: argument positions feed formal positions of every possible
//! callee (see [`super::callgraph`]), and a worklist iteration propagates
//! summaries to a least fixpoint, so mutation observed anywhere in a call
//! chain surfaces on every entry point that can reach it.
//!
//! Constructors are exempt at position 0: initializing the object under
//! construction (directly, via delegation, or through helpers called on
//! `this`) is what a constructor is for. Mutating a constructor
//! *parameter* is still a finding.
//!
//! Two deliberate approximations, both conservative for the corpus this
//! tool targets: values returned from calls are treated as fresh (a
//! function that returns one of its arguments launders the alias), and an
//! object stored into a field of `this` is tracked as receiver state from
//! then on rather than as its original position.

use super::callgraph;
use crate::ast::*;
use crate::resolve::{BodyOwner, CallKind, FnKey, ResolvedProgram, VarKind};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug)]
pub struct MutationSummaries {
    /// Positions through which each body may mutate caller-visible data.
    pub marked: BTreeMap<FnKey, BTreeSet<usize>>,
}

///// Human name for an argument position of a body: `this` for the receiver
/// of methods and constructors, the parameter name otherwise.
pub fn position_name<'a>(owner: &BodyOwner<'a>, pos: usize) -> &'a str {
    let params = owner.params();
    if owner.has_receiver() {
        if pos == 0 {
            "this"
        } else {
            &params[pos - 1].name.name
        }
    } else {
        &params[pos].name.name
    }
}

/// Can this parameter carry caller-visible data into the body? `ref` slots
/// alias the caller's binding whatever the type; class values alias the
/// object itself; lists may contain objects. Plain ints, bools and units
/// passed by value are copies.
pub fn is_conduit(p: &Param) -> bool {
    p.mode != Mode::Value || matches!(p.ty, TypeRef::Class(_) | TypeRef::List)
}

type Sources = BTreeSet<usize>;

#[derive(Clone, Copy)]
struct Formal {
    pos: usize,
    conduit: bool,
    mode: Mode,
}

struct BodyCtx<'p> {
    prog: &'p ResolvedProgram,
    formals: BTreeMap<&'p str, Formal>,
    /// Positions each local may alias.
    orig: BTreeMap<String, Sources>,
}

impl<'p> BodyCtx<'p> {
    /// Argument positions whose data the value of `e` may alias.
    fn sources(&self, e: &Expr) -> Sources {
        match &e.kind {
            ExprKind::Var(name) => match self.prog.var_kinds.get(&e.id) {
                Some(VarKind::This) => Sources::from([0]),
                // An object read out of a field is receiver state.
                Some(VarKind::Field) => Sources::from([0]),
                _ => {
                    let mut s = Sources::new();
                    if let Some(f) = self.formals.get(name.as_str()) {
                        if f.conduit {
                            s.insert(f.pos);
                        }
                    }
                    if let Some(o) = self.orig.get(name) {
                        s.extend(o);
                    }
                    s
                }
            },
            ExprKind::Field { base, .. } => self.sources(base),
            ExprKind::Cons { head, tail } => {
                let mut s = self.sources(head);
                s.extend(self.sources(tail));
                s
            }
            ExprKind::Head(x) | ExprKind::Tail(x) => self.sources(x),
            // Call results are treated as fresh values; literals, nil and
            // arithmetic cannot alias anything.
            _ => Sources::new(),
        }
    }

    /// One pass of local-alias propagation; returns whether anything grew.
    fn orig_pass(&mut self, stmts: &[Stmt]) -> bool {
        let mut changed = false;
        for s in stmts {
            match &s.kind {
                StmtKind::Let { name, value } => {
                    changed |= self.flow_into_local(&name.name, value);
                }
                StmtKind::Assign { target: AssignTarget::Var { id, name }, value }
                    if self.prog.var_kinds.get(id) == Some(&VarKind::Local) =>
                {
                    changed |= self.flow_into_local(&name.name, value);
                }
                StmtKind::If { then_block, else_block, .. } => {
                    changed |= self.orig_pass(&then_block.stmts);
                    if let Some(e) = else_block {
                        changed |= self.orig_pass(&e.stmts);
                    }
                }
                StmtKind::While { body, .. } => changed |= self.orig_pass(&body.stmts),
                _ => {}
            }
        }
        changed
    }

    fn flow_into_local(&mut self, name: &str, value: &Expr) -> bool {
        let srcs = self.sources(value);
        if srcs.is_empty() {
            return false;
        }
        let entry = self.orig.entry(name.to_string()).or_default();
        let before = entry.len();
        entry.extend(srcs);
        entry.len() != before
    }
}

/// A call site: possible callees, and which caller positions feed which
/// callee positions.
struct CallEvent {
    targets: Vec<FnKey>,
    flows: Vec<(usize, Sources)>,
}

struct BodyFacts {
    key: FnKey,
    is_ctor: bool,
    /// Positions mutated without looking at any callee.
    direct: Sources,
    calls: Vec<CallEvent>,
}

fn collect_facts(prog: &ResolvedProgram, key: FnKey, owner: &BodyOwner<'_>) -> BodyFacts {
    let offset = usize::from(owner.has_receiver());
    let mut ctx = BodyCtx {
        prog,
        formals: owner
            .params()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                (
                    p.name.name.as_str(),
                    Formal { pos: i + offset, conduit: is_conduit(p), mode: p.mode },
                )
            })
            .collect(),
        orig: BTreeMap::new(),
    };
    while ctx.orig_pass(&owner.body().stmts) {}

    let enclosing = match owner {
        BodyOwner::Free(_) => None,
        BodyOwner::Method(c, _) | BodyOwner::Ctor(c, _) => Some(*c),
    };
    let is_ctor = matches!(owner, BodyOwner::Ctor(..));

    let mut direct = Sources::new();
    collect_direct(&ctx, &owner.body().stmts, &mut direct);

    let mut calls = Vec::new();
    {
        let mut visit = |e: &Expr| {
            if let Some(ev) = call_event(&ctx, enclosing, e) {
                calls.push(ev);
            }
        };
        if let BodyOwner::Ctor(_, k) = owner {
            if let Some(bi) = &k.base_init {
                for a in &bi.args {
                    callgraph::for_each_expr(a, &mut visit);
                }
            }
            for fi in &k.field_inits {
                callgraph::for_each_expr(&fi.value, &mut visit);
            }
        }
        callgraph::for_each_expr_in_stmts(&owner.body().stmts, &mut visit);
    }
    // Delegation passes the object under construction to the base
    // constructor as its receiver.
    if let BodyOwner::Ctor(class, k) = owner {
        if let Some(t) = callgraph::base_target(prog, class, k) {
            let mut flows = vec![(0, Sources::from([0]))];
            if let Some(bi) = &k.base_init {
                for (j, a) in bi.args.iter().enumerate() {
                    flows.push((j + 1, ctx.sources(a)));
                }
            }
            calls.push(CallEvent { targets: vec![t], flows });
        }
    }

    if is_ctor {
        direct.remove(&0);
    }
    BodyFacts { key, is_ctor, direct, calls }
}

fn collect_direct(ctx: &BodyCtx<'_>, stmts: &[Stmt], direct: &mut Sources) {
    for s in stmts {
        match &s.kind {
            StmtKind::Assign { target, .. } => match target {
                AssignTarget::Var { id, name } => match ctx.prog.var_kinds.get(id) {
                    Some(VarKind::Field) => {
                        direct.insert(0);
                    }
                    // Writing a local slot reaches the caller only when the
                    // slot is a `ref` parameter. (A `constref` slot write
                    // aborts at runtime before mutating anything.)
                    _ => {
                        if let Some(f) = ctx.formals.get(name.name.as_str()) {
                            if f.mode == Mode::Ref {
                                direct.insert(f.pos);
                            }
                        }
                    }
                },
                AssignTarget::Field { base, .. } => {
                    direct.extend(ctx.sources(base));
                }
            },
            StmtKind::If { then_block, else_block, .. } => {
                collect_direct(ctx, &then_block.stmts, direct);
                if let Some(e) = else_block {
                    collect_direct(ctx, &e.stmts, direct);
                }
            }
            StmtKind::While { body, .. } => collect_direct(ctx, &body.stmts, direct),
            _ => {}
        }
    }
}

fn call_event(ctx: &BodyCtx<'_>, enclosing: Option<&str>, e: &Expr) -> Option<CallEvent> {
    let flows: Vec<(usize, Sources)> = match &e.kind {
        ExprKind::Call { args, .. } => match ctx.prog.call_kinds.get(&e.id) {
            Some(CallKind::Function(_)) => {
                args.iter().enumerate().map(|(j, a)| (j, ctx.sources(a))).collect()
            }
            Some(CallKind::MethodOnThis(_)) => std::iter::once((0, Sources::from([0])))
                .chain(args.iter().enumerate().map(|(j, a)| (j + 1, ctx.sources(a))))
                .collect(),
            _ => return None,
        },
        ExprKind::MethodCall { recv, args, .. } => std::iter::once((0, ctx.sources(recv)))
            .chain(args.iter().enumerate().map(|(j, a)| (j + 1, ctx.sources(a))))
            .collect(),
        // Position 0 of the constructor is the fresh object.
        ExprKind::New { args, .. } => {
            args.iter().enumerate().map(|(j, a)| (j + 1, ctx.sources(a))).collect()
        }
        _ => return None,
    };
    let targets = callgraph::call_targets(ctx.prog, enclosing, e);
    if targets.is_empty() {
        return None;
    }
    Some(CallEvent { targets, flows })
}

/// Compute may-mutate summaries for every body as a least fixpoint.
pub fn mutation_summaries(prog: &ResolvedProgram) -> MutationSummaries {
    let facts: Vec<BodyFacts> =
        prog.bodies().into_iter().map(|(k, o)| collect_facts(prog, k, &o)).collect();
    let mut marked: BTreeMap<FnKey, BTreeSet<usize>> =
        facts.iter().map(|f| (f.key.clone(), f.direct.clone())).collect();
    loop {
        let mut changed = false;
        for f in &facts {
            let mut add = Sources::new();
            for ev in &f.calls {
                for (pos, srcs) in &ev.flows {
                    if srcs.is_empty() {
                        continue;
                    }
                    if ev.targets.iter().any(|t| marked.get(t).is_some_and(|m| m.contains(pos))) {
                        add.extend(srcs);
                    }
                }
            }
            if f.is_ctor {
                add.remove(&0);
            }
            let entry = marked.get_mut(&f.key).expect("every body has an entry");
            let before = entry.len();
            entry.extend(add);
            changed |= entry.len() != before;
        }
        if !changed {
            return MutationSummaries { marked };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_file, IdGen};
    use crate::resolve::resolve;

    /// Non-empty summaries as `subject → positions`.
    fn marks(src: &str) -> BTreeMap<String, Vec<usize>> {
        let mut ids = IdGen::default();
        let prog = resolve(parse_file(src, "t.moo", &mut ids).unwrap()).unwrap();
        mutation_summaries(&prog)
            .marked
            .into_iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, v)| (k.to_string(), v.into_iter().collect()))
            .collect()
    }

    const BUMPER: &str =
        "class C {\n  public:\n    int x;\n    unit bump() { x = x + 1; }\n  C() : x(0) {}\n}\n";

    #[test]
    fn field_assignment_marks_the_receiver() {
        let m = marks(BUMPER);
        assert_eq!(m["C::bump"], vec![0]);
    }

    #[test]
    fn ref_slot_write_marks_the_parameter_but_value_copies_do_not() {
        let m = marks("unit set5(ref int p) { p = 5; }\nunit scratch(int p) { p = 5; }");
        assert_eq!(m.get("set5"), Some(&vec![0]));
        assert_eq!(m.get("scratch"), None);
    }

    #[test]
    fn constref_write_attempts_are_not_successful_mutations() {
        let m = marks("unit f(constref int p) { p = 5; }");
        assert!(m.is_empty());
    }

    #[test]
    fn mutation_propagates_through_free_calls() {
        let m = marks("unit inner(ref int x) { x = 1; }\nunit outer(ref int y) { inner(y); }");
        assert_eq!(m.get("outer"), Some(&vec![0]));
    }

    #[test]
    fn method_call_on_a_parameter_marks_it() {
        let src = format!("{BUMPER}unit drive(C c) {{ c.bump(); }}");
        let m = marks(&src);
        assert_eq!(m.get("drive"), Some(&vec![0]));
    }

    #[test]
    fn aliases_through_locals_and_list_heads_are_tracked() {
        let src = format!("{BUMPER}unit f(list l) {{ let o = head(l); o.bump(); }}");
        let m = marks(&src);
        assert_eq!(m.get("f"), Some(&vec![0]));
    }

    #[test]
    fn constructors_may_initialize_themselves_but_not_mutate_parameters() {
        let src = format!(
            "{BUMPER}class D : C {{\n  public:\n    int n;\n  D(C other) : C(), n(0) {{\n    n = 7;\n    other.bump();\n  }}\n}}"
        );
        let m = marks(&src);
        // position 0 (the object under construction) is exempt; the
        // parameter at position 1 is not.
        assert_eq!(m.get("D::D/1"), Some(&vec![1]));
    }

    #[test]
    fn delegation_carries_parameter_mutation_upward() {
        let src = "class A {\n  public:\n    int n;\n  A(ref int k) : n(0) { k = 5; }\n}\nclass B : A {\n  B(ref int j) : A(j) {}\n}";
        let m = marks(src);
        assert_eq!(m.get("A::A/1"), Some(&vec![1]));
        assert_eq!(m.get("B::B/1"), Some(&vec![1]));
    }

    #[test]
    fn any_possible_callee_mutating_is_enough() {
        let src = "class A { public: virtual unit g() { return; } A() {} }\nclass B : A {\n  public:\n    int x;\n    unit g() { x = 1; }\n  B() : A(), x(0) {}\n}\nunit drive(A a) { a.g(); }";
        let m = marks(src);
        assert_eq!(m.get("drive"), Some(&vec![0]));
    }

    #[test]
    fn recursive_pairs_reach_a_fixpoint() {
        let src = "unit f(ref int x, int d) {\n  if (d > 0) {\n    g(x, d - 1);\n  }\n}\nunit g(ref int y, int d) {\n  f(y, d);\n  y = 1;\n}";
        let m = marks(src);
        assert_eq!(m.get("f"), Some(&vec![0]));
        assert_eq!(m.get("g"), Some(&vec![0]));
    }

    #[test]
    fn reads_alone_mark_nothing() {
        let src = "class S {\n  private:\n    list xs;\n  public:\n    int size() {\n      let n = 0;\n      let es = xs;\n      while (!is_nil(es)) {\n        n = n + 1;\n        es = tail(es);\n      }\n      return n;\n    }\n  S() : xs(nil) {}\n  friend peek;\n}\nlist peek(constref S s) { return s.xs; }";
        let m = marks(src);
        assert!(m.is_empty(), "{m:?}");
    }

    #[test]
    fn the_insert_helper_pattern_marks_the_whole_chain() {
        let src = "class Bag {\n  private:\n    list elems;\n  public:\n    unit put(int e) { bag_insert(this, e); }\n  Bag() : elems(nil) {}\n  friend bag_insert;\n  friend to_list;\n}\nunit bag_insert(ref Bag b, int e) { b.elems = cons(e, b.elems); }\nlist to_list(constref Bag b) { return b.elems; }\nunit merge_into(ref Bag to, constref Bag from) {\n  let es = to_list(from);\n  while (!is_nil(es)) {\n    to.put(head(es));\n    es = tail(es);\n  }\n}";
        let m = marks(src);
        assert_eq!(m.get("bag_insert"), Some(&vec![0]));
        assert_eq!(m.get("Bag::put"), Some(&vec![0]));
        assert_eq!(m.get("merge_into"), Some(&vec![0]), "only `to`, never `from`");
        assert_eq!(m.get("to_list"), None);
    }

    #[test]
    fn position_names_for_messages() {
        let mut ids = IdGen::default();
        let prog = resolve(
            parse_file("class C { public: unit m(int a, ref C b) { a = b.f(a); } private: int f(int z) { return z; } C() {} }", "t.moo", &mut ids).unwrap(),
        )
        .unwrap();
        let bodies = prog.bodies();
        let (_, owner) = bodies.iter().find(|(k, _)| k.to_string() == "C::m").unwrap();
        assert_eq!(position_name(owner, 0), "this");
        assert_eq!(position_name(owner, 1), "a");
        assert_eq!(position_name(owner, 2), "b");
    }
}
