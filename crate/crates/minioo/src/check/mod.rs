//! The rule checker. Four families of checks enforce the discipline under
//! which subclassing cannot change the behavior of existing code:
//!
//! * `R1_NO_VIRTUAL` — no method may be declared `virtual`;
//! * `R2_OPAQUE_EXPORTS` — an exported class exposes no public fields or
//!   methods (constructors and friend declarations are exempt: construction
//!   and a closed set of free functions are the interface);
//! * `R3S_NO_MUTATION` — strict: no assignment statements at all
//!   (constructor initializer lists don't count, they create state);
//! * `R3R_NO_ARG_MUTATION` — relaxed: interprocedural check that no
//!   function or method mutates data received from its caller (see
//!   [`mutation`]);
//! * `R4_CTOR_DELEGATION` — constructors of derived classes delegate to a
//!   base constructor and don't assign fields in their bodies.
//!
//! The two R3 forms are alternatives: a configuration enables at most one.
//! Every diagnostic points at the precise token (the `virtual` keyword, the
//! member name, the `=` sign) and ranking is stable: file, line, column,
//! then rule name.

pub mod callgraph;
pub mod mutation;

use crate::ast::*;
use crate::resolve::{FnKey, ResolvedProgram, VarKind};
use crate::span::Span;
use serde_json::json;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RuleId {
    R1NoVirtual,
    R2OpaqueExports,
    R3SNoMutation,
    R3RNoArgMutation,
    R4CtorDelegation,
}

impl RuleId {
    pub fn name(self) -> &'static str {
        match self {
            RuleId::R1NoVirtual => "R1_NO_VIRTUAL",
            RuleId::R2OpaqueExports => "R2_OPAQUE_EXPORTS",
            RuleId::R3SNoMutation => "R3S_NO_MUTATION",
            RuleId::R3RNoArgMutation => "R3R_NO_ARG_MUTATION",
            RuleId::R4CtorDelegation => "R4_CTOR_DELEGATION",
        }
    }

    pub const ALL: [RuleId; 5] = [
        RuleId::R1NoVirtual,
        RuleId::R2OpaqueExports,
        RuleId::R3SNoMutation,
        RuleId::R3RNoArgMutation,
        RuleId::R4CtorDelegation,
    ];
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub rule: RuleId,
    pub span: Span,
    /// Qualified name of the declaration the finding is about.
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.span, self.rule, self.message)
    }
}

#[derive(Clone, Debug)]
pub struct CheckConfig {
    rules: BTreeSet<RuleId>,
}

impl CheckConfig {
    /// Build a configuration; the strict and relaxed mutation rules are
    /// mutually exclusive selections of the same family.
    pub fn new(rules: impl IntoIterator<Item = RuleId>) -> Result<CheckConfig, String> {
        let rules: BTreeSet<RuleId> = rules.into_iter().collect();
        if rules.contains(&RuleId::R3SNoMutation) && rules.contains(&RuleId::R3RNoArgMutation) {
            return Err("strict and relaxed mutation checks cannot both be enabled".into());
        }
        Ok(CheckConfig { rules })
    }

    pub fn all_strict() -> CheckConfig {
        CheckConfig {
            rules: [
                RuleId::R1NoVirtual,
                RuleId::R2OpaqueExports,
                RuleId::R3SNoMutation,
                RuleId::R4CtorDelegation,
            ]
            .into_iter()
            .collect(),
        }
    }

    pub fn all_relaxed() -> CheckConfig {
        CheckConfig {
            rules: [
                RuleId::R1NoVirtual,
                RuleId::R2OpaqueExports,
                RuleId::R3RNoArgMutation,
                RuleId::R4CtorDelegation,
            ]
            .into_iter()
            .collect(),
        }
    }

    pub fn enabled(&self) -> impl Iterator<Item = RuleId> + '_ {
        self.rules.iter().copied()
    }

    pub fn is_enabled(&self, rule: RuleId) -> bool {
        self.rules.contains(&rule)
    }
}

/// Run every enabled rule and rank the findings by (file, line, column,
/// rule name).
pub fn check_all(prog: &ResolvedProgram, config: &CheckConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for rule in config.enabled() {
        out.extend(match rule {
            RuleId::R1NoVirtual => check_r1(prog),
            RuleId::R2OpaqueExports => check_r2(prog),
            RuleId::R3SNoMutation => check_r3_strict(prog),
            RuleId::R3RNoArgMutation => check_r3_relaxed(prog),
            RuleId::R4CtorDelegation => check_r4(prog),
        });
    }
    out.sort_by(|a, b| {
        (&a.span.file, a.span.line, a.span.col, a.rule.name()).cmp(&(
            &b.span.file,
            b.span.line,
            b.span.col,
            b.rule.name(),
        ))
    });
    out
}

/// One diagnostic per `virtual` keyword, in source order.
pub fn check_r1(prog: &ResolvedProgram) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for class in prog.program.classes() {
        for m in &class.methods {
            if let Some(span) = &m.virtual_span {
                out.push(Diagnostic {
                    rule: RuleId::R1NoVirtual,
                    span: span.clone(),
                    subject: format!("{}::{}", class.name.name, m.name.name),
                    message: format!(
                        "method `{}` of class `{}` is declared virtual",
                        m.name.name, class.name.name
                    ),
                });
            }
        }
    }
    out
}

/// One diagnostic per public member of an exported class, in source order.
pub fn check_r2(prog: &ResolvedProgram) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for class in prog.program.classes() {
        if !class.exported {
            continue;
        }
        let mut members: Vec<(u32, Diagnostic)> = Vec::new();
        for f in &class.fields {
            if f.vis == Vis::Public {
                members.push((
                    f.ord,
                    Diagnostic {
                        rule: RuleId::R2OpaqueExports,
                        span: f.name.span.clone(),
                        subject: format!("{}::{}", class.name.name, f.name.name),
                        message: format!(
                            "exported class `{}` has a public field `{}`",
                            class.name.name, f.name.name
                        ),
                    },
                ));
            }
        }
        for m in &class.methods {
            if m.vis == Vis::Public {
                members.push((
                    m.ord,
                    Diagnostic {
                        rule: RuleId::R2OpaqueExports,
                        span: m.name.span.clone(),
                        subject: format!("{}::{}", class.name.name, m.name.name),
                        message: format!(
                            "exported class `{}` has a public method `{}`",
                            class.name.name, m.name.name
                        ),
                    },
                ));
            }
        }
        members.sort_by_key(|(ord, _)| *ord);
        out.extend(members.into_iter().map(|(_, d)| d));
    }
    out
}

fn describe_target(prog: &ResolvedProgram, target: &AssignTarget) -> String {
    match target {
        AssignTarget::Var { id, name } => match prog.var_kinds.get(id) {
            Some(VarKind::Field) => format!("field `{}`", name.name),
            _ => format!("local `{}`", name.name),
        },
        AssignTarget::Field { name, .. } => format!("field `{}`", name.name),
    }
}

fn walk_assigns<'a>(stmts: &'a [Stmt], out: &mut Vec<&'a Stmt>) {
    for s in stmts {
        match &s.kind {
            StmtKind::Assign { .. } => out.push(s),
            StmtKind::If { then_block, else_block, .. } => {
                walk_assigns(&then_block.stmts, out);
                if let Some(e) = else_block {
                    walk_assigns(&e.stmts, out);
                }
            }
            StmtKind::While { body, .. } => walk_assigns(&body.stmts, out),
            _ => {}
        }
    }
}

/// Strict form: every assignment statement is a finding, anchored at its
/// `=` sign. Constructor initializer lists are not assignments.
pub fn check_r3_strict(prog: &ResolvedProgram) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (key, owner) in prog.bodies() {
        let mut assigns = Vec::new();
        walk_assigns(&owner.body().stmts, &mut assigns);
        for s in assigns {
            let StmtKind::Assign { target, .. } = &s.kind else { unreachable!() };
            out.push(Diagnostic {
                rule: RuleId::R3SNoMutation,
                span: s.span.clone(),
                subject: key.to_string(),
                message: format!("assignment to {}", describe_target(prog, target)),
            });
        }
    }
    out
}

/// Relaxed form: interprocedural — see [`mutation::mutation_summaries`].
/// One diagnostic per function/method/constructor that may mutate data
/// received from its caller, anchored at the declaration name.
pub fn check_r3_relaxed(prog: &ResolvedProgram) -> Vec<Diagnostic> {
    let summaries = mutation::mutation_summaries(prog);
    let mut out = Vec::new();
    for (key, owner) in prog.bodies() {
        let Some(marked) = summaries.marked.get(&key) else { continue };
        if marked.is_empty() {
            continue;
        }
        let names: Vec<String> = marked
            .iter()
            .map(|&pos| format!("`{}`", mutation::position_name(&owner, pos)))
            .collect();
        out.push(Diagnostic {
            rule: RuleId::R3RNoArgMutation,
            span: owner.name_span().clone(),
            subject: key.to_string(),
            message: format!("may mutate argument(s): {}", names.join(", ")),
        });
    }
    out
}

/// Derived-class constructors must delegate and must not assign fields.
pub fn check_r4(prog: &ResolvedProgram) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for class in prog.program.classes() {
        if class.base.is_none() {
            continue;
        }
        for k in &class.ctors {
            let key = FnKey::Ctor(class.name.name.clone(), k.params.len());
            if k.base_init.is_none() {
                out.push(Diagnostic {
                    rule: RuleId::R4CtorDelegation,
                    span: k.name.span.clone(),
                    subject: key.to_string(),
                    message: format!(
                        "constructor of derived class `{}` does not call a base constructor",
                        class.name.name
                    ),
                });
            }
            let mut assigns = Vec::new();
            walk_assigns(&k.body.stmts, &mut assigns);
            for s in assigns {
                let StmtKind::Assign { target, .. } = &s.kind else { unreachable!() };
                let is_field = match target {
                    AssignTarget::Var { id, .. } => prog.var_kinds.get(id) == Some(&VarKind::Field),
                    AssignTarget::Field { .. } => true,
                };
                if is_field {
                    out.push(Diagnostic {
                        rule: RuleId::R4CtorDelegation,
                        span: s.span.clone(),
                        subject: key.to_string(),
                        message: format!(
                            "derived-class constructor assigns {} in its body",
                            describe_target(prog, target)
                        ),
                    });
                }
            }
        }
    }
    out
}

/// Stable JSON document for `--format json`.
pub fn diagnostics_json(diags: &[Diagnostic], config: &CheckConfig) -> serde_json::Value {
    json!({
        "version": 1,
        "diagnostics": diags.iter().map(|d| json!({
            "rule": d.rule.name(),
            "file": d.span.file.as_ref(),
            "line": d.span.line,
            "col": d.span.col,
            "subject": d.subject,
            "message": d.message,
        })).collect::<Vec<_>>(),
        "summary": {
            "checked_rules": config.enabled().map(|r| r.name()).collect::<Vec<_>>(),
            "violation_count": diags.len(),
        },
    })
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

    #[test]
    fn r1_points_at_the_virtual_keyword() {
        let p = resolved("class A {\n  public:\n    virtual int f() { return 1; }\n  A() {}\n}");
        let d = check_r1(&p);
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].span.line, d[0].span.col), (3, 5));
        assert_eq!(d[0].subject, "A::f");
        // unmarked overrides are not findings
        let p = resolved(
            "class A { public: virtual int f() { return 1; } A() {} }\nclass B : A { public: int f() { return 2; } B() : A() {} }",
        );
        assert_eq!(check_r1(&p).len(), 1);
    }

    #[test]
    fn r2_flags_public_members_of_exported_classes_only() {
        let src = "export class E {\n  public:\n    int x;\n    int get() { return x; }\n  private:\n    int hidden;\n  E() : x(0), hidden(0) {}\n  friend peek;\n}\nclass Plain {\n  public:\n    int y;\n  Plain() : y(1) {}\n}\nint peek(E e) { return e.hidden; }";
        let p = resolved(src);
        let d = check_r2(&p);
        let subjects: Vec<&str> = d.iter().map(|d| d.subject.as_str()).collect();
        assert_eq!(subjects, vec!["E::x", "E::get"]);
    }

    #[test]
    fn r2_is_empty_for_constructor_only_exports() {
        let p = resolved("export class F {\n  private:\n    list xs;\n  F() : xs(nil) {}\n  friend peek;\n}\nlist peek(F f) { return f.xs; }");
        assert!(check_r2(&p).is_empty());
    }

    #[test]
    fn r3_strict_flags_each_assignment_at_its_equals_sign() {
        let src = "unit f() {\n  let x = 1;\n  x = 2;\n  while (x < 3) {\n    x = x + 1;\n  }\n}";
        let p = resolved(src);
        let d = check_r3_strict(&p);
        assert_eq!(d.len(), 2);
        assert_eq!((d[0].span.line, d[0].span.col), (3, 5));
        assert_eq!(d[0].message, "assignment to local `x`");
        assert_eq!((d[1].span.line, d[1].span.col), (5, 7));
    }

    #[test]
    fn r3_strict_exempts_initializer_lists() {
        let p = resolved("class C { private: list xs; C() : xs(nil) {} }");
        assert!(check_r3_strict(&p).is_empty());
    }

    #[test]
    fn r4_requires_delegation_and_no_field_assignments() {
        let src = "class A { public: int x; A() : x(0) {} A(int v) : x(v) {} }\nclass B : A {\n  public:\n    int y;\n  B() {\n    y = 1;\n  }\n  B(int v) : A(v), y(v) {\n  }\n}";
        let p = resolved(src);
        let d = check_r4(&p);
        assert_eq!(d.len(), 2, "{d:?}");
        assert!(d[0].message.contains("does not call a base constructor"));
        assert_eq!(d[0].subject, "B::B/0");
        assert!(d[1].message.contains("assigns field `y`"));
        // local assignments in ctor bodies are not R4 findings
        let src2 = "class A { A() {} }\nclass B : A { B() : A() { let t = 1; t = 2; } }";
        assert!(check_r4(&resolved(src2)).is_empty());
    }

    #[test]
    fn r4_ignores_base_classes() {
        let p = resolved("class A { public: int x; A() { x = 1; } }");
        assert!(check_r4(&p).is_empty());
        // ...but strict mutation still sees the body assignment
        assert_eq!(check_r3_strict(&p).len(), 1);
    }

    #[test]
    fn config_rejects_both_mutation_forms() {
        assert!(CheckConfig::new([RuleId::R3SNoMutation, RuleId::R3RNoArgMutation]).is_err());
        assert!(CheckConfig::new([RuleId::R3SNoMutation]).is_ok());
    }

    #[test]
    fn check_all_orders_by_position_then_rule() {
        let src = "export class E : Base {\n  public:\n    virtual unit f() { x = 1; }\n    int x;\n  E() {}\n}\nclass Base { public: virtual unit f() { return; } Base() {} }";
        let p = resolved(src);
        let d = check_all(&p, &CheckConfig::all_strict());
        let spans: Vec<(u32, u32)> = d.iter().map(|d| (d.span.line, d.span.col)).collect();
        let mut sorted = spans.clone();
        sorted.sort();
        assert_eq!(spans, sorted);
        // same-position ties break by rule name
        for w in d.windows(2) {
            if w[0].span == w[1].span {
                assert!(w[0].rule.name() <= w[1].rule.name());
            }
        }
    }

    #[test]
    fn enabling_more_rules_never_removes_findings() {
        let src =
            "export class E {\n  public:\n    virtual unit f() { x = 1; }\n    int x;\n  E() {}\n}";
        let p = resolved(src);
        let small = check_all(&p, &CheckConfig::new([RuleId::R1NoVirtual]).unwrap());
        let big = check_all(&p, &CheckConfig::all_strict());
        for d in &small {
            assert!(
                big.iter().any(|b| b.rule == d.rule && b.span == d.span),
                "finding lost when enabling more rules"
            );
        }
        assert!(big.len() > small.len());
    }

    #[test]
    fn json_document_shape() {
        let p = resolved("class A { public: virtual int f() { return 1; } A() {} }");
        let config = CheckConfig::all_strict();
        let d = check_all(&p, &config);
        let doc = diagnostics_json(&d, &config);
        assert_eq!(doc["version"], 1);
        assert_eq!(doc["summary"]["violation_count"], 1);
        assert_eq!(doc["diagnostics"][0]["rule"], "R1_NO_VIRTUAL");
        assert_eq!(doc["diagnostics"][0]["file"], "t.moo");
        assert!(doc["summary"]["checked_rules"].as_array().unwrap().len() == 4);
    }
}
