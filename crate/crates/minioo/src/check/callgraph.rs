//! Call-graph construction over a resolved program.
//!
//! Receivers carry no static types, so a call `r.put(e)` may land in any
//! class that declares `put`; the one precise case is a non-virtual call
//! through `this`, which resolves to a unique declaration on the enclosing
//! class's chain. `new` expressions and constructor delegation (explicit or
//! implied) produce edges to constructor bodies. Everything is ordered for
//! reproducible output.

use crate::ast::*;
use crate::resolve::{BodyOwner, CallKind, Dispatch, FnKey, ResolvedProgram};
use std::collections::{BTreeMap, BTreeSet};

/// Visit `e` and every sub-expression, outermost first.
pub fn for_each_expr<'a>(e: &'a Expr, f: &mut impl FnMut(&'a Expr)) {
    f(e);
    match &e.kind {
        ExprKind::IntLit(_) | ExprKind::BoolLit(_) | ExprKind::Nil | ExprKind::Var(_) => {}
        ExprKind::Field { base, .. } => for_each_expr(base, f),
        ExprKind::MethodCall { recv, args, .. } => {
            for_each_expr(recv, f);
            for a in args {
                for_each_expr(a, f);
            }
        }
        ExprKind::Call { args, .. } | ExprKind::New { args, .. } => {
            for a in args {
                for_each_expr(a, f);
            }
        }
        ExprKind::Cons { head, tail } => {
            for_each_expr(head, f);
            for_each_expr(tail, f);
        }
        ExprKind::Head(x) | ExprKind::Tail(x) | ExprKind::IsNil(x) => for_each_expr(x, f),
        ExprKind::Unary { operand, .. } => for_each_expr(operand, f),
        ExprKind::Binary { lhs, rhs, .. } => {
            for_each_expr(lhs, f);
            for_each_expr(rhs, f);
        }
    }
}

/// Visit every expression under `stmts`, in source order.
pub fn for_each_expr_in_stmts<'a>(stmts: &'a [Stmt], f: &mut impl FnMut(&'a Expr)) {
    for s in stmts {
        match &s.kind {
            StmtKind::Let { value, .. } => for_each_expr(value, f),
            StmtKind::Assign { target, value } => {
                if let AssignTarget::Field { base, .. } = target {
                    for_each_expr(base, f);
                }
                for_each_expr(value, f);
            }
            StmtKind::If { cond, then_block, else_block } => {
                for_each_expr(cond, f);
                for_each_expr_in_stmts(&then_block.stmts, f);
                if let Some(e) = else_block {
                    for_each_expr_in_stmts(&e.stmts, f);
                }
            }
            StmtKind::While { cond, body } => {
                for_each_expr(cond, f);
                for_each_expr_in_stmts(&body.stmts, f);
            }
            StmtKind::Return(Some(e)) | StmtKind::Assert(e) | StmtKind::Expr(e) => {
                for_each_expr(e, f)
            }
            StmtKind::Return(None) => {}
        }
    }
}

/// The constructor a `new C(args)` runs: the declared one of matching
/// arity, or — when the class relies on the implicit default — the nearest
/// declared zero-argument constructor up the chain, if any.
pub fn new_target(prog: &ResolvedProgram, class: &str, arity: usize) -> Option<FnKey> {
    if prog.ctor_of(class, arity).is_some() {
        return Some(FnKey::Ctor(class.to_string(), arity));
    }
    if arity != 0 {
        return None;
    }
    let mut cur = Some(class.to_string());
    while let Some(c) = cur {
        if !prog.has_implicit_default_ctor(&c) {
            return prog.ctor_of(&c, 0).map(|_| FnKey::Ctor(c, 0));
        }
        cur = prog.classes.get(&c).and_then(|i| i.base.clone());
    }
    None
}

/// The base constructor a derived-class constructor delegates to, whether
/// written as `: Base(...)` or implied (no initializer runs the base's
/// zero-argument construction).
pub fn base_target(prog: &ResolvedProgram, class: &str, ctor: &CtorDecl) -> Option<FnKey> {
    let base = prog.classes.get(class)?.base.as_deref()?;
    match &ctor.base_init {
        Some(bi) => Some(FnKey::Ctor(base.to_string(), bi.args.len())),
        None => new_target(prog, base, 0),
    }
}

/// Possible callees of a call-shaped expression, sorted and deduplicated;
/// empty for other expressions and for the `print` builtin.
/// `enclosing_class` is the class whose body the expression occurs in.
pub fn call_targets(prog: &ResolvedProgram, enclosing_class: Option<&str>, e: &Expr) -> Vec<FnKey> {
    let mut out = BTreeSet::new();
    match &e.kind {
        ExprKind::Call { .. } => match prog.call_kinds.get(&e.id) {
            Some(CallKind::Function(name)) => {
                out.insert(FnKey::Free(name.clone()));
            }
            Some(CallKind::MethodOnThis(name)) => {
                if prog.dispatch.get(&e.id) == Some(&Dispatch::Virtual) {
                    for c in prog.declaring_classes(name) {
                        out.insert(FnKey::Method(c.to_string(), name.clone()));
                    }
                } else if let Some((declaring, _)) =
                    enclosing_class.and_then(|c| prog.method_in(c, name))
                {
                    out.insert(FnKey::Method(declaring.to_string(), name.clone()));
                }
            }
            Some(CallKind::Print) | None => {}
        },
        // The receiver's class is unknown statically whether or not the
        // method is virtual, so every declaration of the name is a
        // possible callee.
        ExprKind::MethodCall { name, .. } => {
            for c in prog.declaring_classes(&name.name) {
                out.insert(FnKey::Method(c.to_string(), name.name.clone()));
            }
        }
        ExprKind::New { class, args } => {
            out.extend(new_target(prog, &class.name, args.len()));
        }
        _ => {}
    }
    out.into_iter().collect()
}

/// Edges from each callable body to the bodies it may invoke.
#[derive(Debug)]
pub struct CallGraph {
    pub edges: BTreeMap<FnKey, BTreeSet<FnKey>>,
}

pub fn build_call_graph(prog: &ResolvedProgram) -> CallGraph {
    let mut edges: BTreeMap<FnKey, BTreeSet<FnKey>> = BTreeMap::new();
    for (key, owner) in prog.bodies() {
        let enclosing = match &owner {
            BodyOwner::Free(_) => None,
            BodyOwner::Method(c, _) | BodyOwner::Ctor(c, _) => Some(*c),
        };
        let mut targets = BTreeSet::new();
        if let BodyOwner::Ctor(class, k) = &owner {
            targets.extend(base_target(prog, class, k));
        }
        let mut visit = |e: &Expr| targets.extend(call_targets(prog, enclosing, e));
        if let BodyOwner::Ctor(_, k) = &owner {
            if let Some(bi) = &k.base_init {
                for a in &bi.args {
                    for_each_expr(a, &mut visit);
                }
            }
            for fi in &k.field_inits {
                for_each_expr(&fi.value, &mut visit);
            }
        }
        for_each_expr_in_stmts(&owner.body().stmts, &mut visit);
        edges.insert(key, targets);
    }
    CallGraph { edges }
}
