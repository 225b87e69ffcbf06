//! Name resolution and well-formedness. The resolver never mutates the AST;
//! it builds side tables keyed by `NodeId` (what a bare name means, how a
//! call dispatches) plus per-class summaries (inheritance chain, field
//! layout, friends). All errors are collected before reporting.
//!
//! Language rules enforced here, since there is no static type checker:
//!
//! * single inheritance, acyclic, with declared base classes;
//! * no field shadowing and no method hiding — a method may be redeclared in
//!   a subclass only if the inherited declaration is virtual, keeping the
//!   same arity and parameter modes, so "first declaration walking up from
//!   the dynamic class" is well-defined for every call;
//! * `private` members are usable only inside the declaring class and its
//!   declared friend functions (subclasses get nothing, as in C++);
//! * `this` is implicitly bound in methods and constructors, is read-only,
//!   and cannot be redeclared;
//! * `ref` arguments must be plain local variables (or `this`), because they
//!   alias the caller's slot;
//! * classes and free functions share the top-level namespace, `print` is
//!   reserved.

use crate::ast::*;
use crate::span::Span;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, Debug)]
pub struct ResolveError {
    pub span: Span,
    pub message: String,
}

impl fmt::Display for ResolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: resolve error: {}", self.span, self.message)
    }
}

impl std::error::Error for ResolveError {}

/// What a bare name in expression position refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Local,
    /// A field of `this`.
    Field,
    This,
}

/// What a bare call `name(args)` refers to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CallKind {
    Function(String),
    MethodOnThis(String),
    Print,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dispatch {
    /// Resolved on the dynamic class of the receiver.
    Virtual,
    /// Resolved on the chain of the receiver's class; unique because hiding
    /// is rejected.
    Static,
}

/// Stable identity of a callable body: a free function, a method, or a
/// constructor (keyed by arity, since constructors overload on arity only).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum FnKey {
    Free(String),
    Method(String, String),
    Ctor(String, usize),
}

impl fmt::Display for FnKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FnKey::Free(n) => write!(f, "{n}"),
            FnKey::Method(c, m) => write!(f, "{c}::{m}"),
            FnKey::Ctor(c, a) => write!(f, "{c}::{c}/{a}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FieldInfo {
    pub name: String,
    pub declaring: String,
    pub vis: Vis,
    pub ty: TypeRef,
}

#[derive(Clone, Debug)]
pub struct ClassInfo {
    pub name: String,
    pub base: Option<String>,
    pub exported: bool,
    pub decl_idx: usize,
    /// self, base, grandbase, … root. Contains only `name` when the
    /// hierarchy above is broken (reported as errors).
    pub chain: Vec<String>,
    /// Field layout, root class first; slot index = position here.
    pub layout: Vec<FieldInfo>,
    pub friends: BTreeSet<String>,
}

#[derive(Debug)]
pub struct ResolvedProgram {
    pub program: Program,
    pub classes: BTreeMap<String, ClassInfo>,
    pub functions: BTreeMap<String, usize>,
    pub var_kinds: BTreeMap<NodeId, VarKind>,
    pub call_kinds: BTreeMap<NodeId, CallKind>,
    pub dispatch: BTreeMap<NodeId, Dispatch>,
    /// Method names carrying `virtual` anywhere in the program.
    pub virtual_names: BTreeSet<String>,
}

/// A callable body together with its parameters, for checker passes.
#[derive(Clone, Copy, Debug)]
pub enum BodyOwner<'a> {
    Free(&'a FunDecl),
    Method(&'a str, &'a MethodDecl),
    Ctor(&'a str, &'a CtorDecl),
}

impl<'a> BodyOwner<'a> {
    pub fn params(&self) -> &'a [Param] {
        match self {
            BodyOwner::Free(f) => &f.params,
            BodyOwner::Method(_, m) => &m.params,
            BodyOwner::Ctor(_, c) => &c.params,
        }
    }

    pub fn body(&self) -> &'a Block {
        match self {
            BodyOwner::Free(f) => &f.body,
            BodyOwner::Method(_, m) => &m.body,
            BodyOwner::Ctor(_, c) => &c.body,
        }
    }

    pub fn name_span(&self) -> &'a Span {
        match self {
            BodyOwner::Free(f) => &f.name.span,
            BodyOwner::Method(_, m) => &m.name.span,
            BodyOwner::Ctor(_, c) => &c.name.span,
        }
    }

    /// True for methods and constructors, whose position 0 is the receiver.
    pub fn has_receiver(&self) -> bool {
        !matches!(self, BodyOwner::Free(_))
    }
}

impl ResolvedProgram {
    pub fn class_decl(&self, name: &str) -> &ClassDecl {
        let idx = self.classes[name].decl_idx;
        match &self.program.decls[idx] {
            Decl::Class(c) => c,
            Decl::Fun(_) => unreachable!("class index points at a function"),
        }
    }

    pub fn fun_decl(&self, name: &str) -> Option<&FunDecl> {
        let idx = *self.functions.get(name)?;
        match &self.program.decls[idx] {
            Decl::Fun(f) => Some(f),
            Decl::Class(_) => unreachable!("function index points at a class"),
        }
    }

    /// First declaration of `name` walking the chain up from `class`.
    pub fn method_in(&self, class: &str, name: &str) -> Option<(&str, &MethodDecl)> {
        let info = self.classes.get(class)?;
        for c in &info.chain {
            let decl = self.class_decl(c);
            if let Some(m) = decl.methods.iter().find(|m| m.name.name == name) {
                return Some((c.as_str(), m));
            }
        }
        None
    }

    /// The declared constructor of the exact arity, if any.
    pub fn ctor_of(&self, class: &str, arity: usize) -> Option<&CtorDecl> {
        let decl = self.class_decl(class);
        decl.ctors.iter().find(|c| c.params.len() == arity)
    }

    /// A class with no declared constructors has an implicit zero-argument
    /// one (fields start uninitialized).
    pub fn has_implicit_default_ctor(&self, class: &str) -> bool {
        self.class_decl(class).ctors.is_empty()
    }

    pub fn field_slot(&self, class: &str, field: &str) -> Option<usize> {
        self.classes[class].layout.iter().position(|f| f.name == field)
    }

    /// All classes that own-declare a method called `name`, sorted.
    pub fn declaring_classes(&self, name: &str) -> Vec<&str> {
        self.classes
            .values()
            .filter(|c| self.class_decl(&c.name).methods.iter().any(|m| m.name.name == name))
            .map(|c| c.name.as_str())
            .collect()
    }

    /// Every callable body in source order.
    pub fn bodies(&self) -> Vec<(FnKey, BodyOwner<'_>)> {
        let mut out = Vec::new();
        for decl in &self.program.decls {
            match decl {
                Decl::Fun(f) => out.push((FnKey::Free(f.name.name.clone()), BodyOwner::Free(f))),
                Decl::Class(c) => {
                    let mut members: Vec<(u32, FnKey, BodyOwner<'_>)> = Vec::new();
                    for m in &c.methods {
                        members.push((
                            m.ord,
                            FnKey::Method(c.name.name.clone(), m.name.name.clone()),
                            BodyOwner::Method(&c.name.name, m),
                        ));
                    }
                    for k in &c.ctors {
                        members.push((
                            k.ord,
                            FnKey::Ctor(c.name.name.clone(), k.params.len()),
                            BodyOwner::Ctor(&c.name.name, k),
                        ));
                    }
                    members.sort_by_key(|(ord, _, _)| *ord);
                    out.extend(members.into_iter().map(|(_, k, b)| (k, b)));
                }
            }
        }
        out
    }
}

pub fn resolve(program: Program) -> Result<ResolvedProgram, Vec<ResolveError>> {
    let mut r = Resolver {
        errors: Vec::new(),
        classes: BTreeMap::new(),
        functions: BTreeMap::new(),
        var_kinds: BTreeMap::new(),
        call_kinds: BTreeMap::new(),
        dispatch: BTreeMap::new(),
        virtual_names: BTreeSet::new(),
        program: &program,
    };
    r.collect_decls();
    r.build_hierarchy();
    r.check_members();
    r.check_bodies();
    let Resolver {
        errors, classes, functions, var_kinds, call_kinds, dispatch, virtual_names, ..
    } = r;
    if errors.is_empty() {
        Ok(ResolvedProgram {
            program,
            classes,
            functions,
            var_kinds,
            call_kinds,
            dispatch,
            virtual_names,
        })
    } else {
        Err(errors)
    }
}

struct Resolver<'p> {
    errors: Vec<ResolveError>,
    classes: BTreeMap<String, ClassInfo>,
    functions: BTreeMap<String, usize>,
    var_kinds: BTreeMap<NodeId, VarKind>,
    call_kinds: BTreeMap<NodeId, CallKind>,
    dispatch: BTreeMap<NodeId, Dispatch>,
    virtual_names: BTreeSet<String>,
    program: &'p Program,
}

/// Where a body is being resolved from, for visibility decisions.
#[derive(Clone, Copy)]
enum Ctx<'a> {
    Free(&'a str),
    InClass(&'a str),
}

impl<'p> Resolver<'p> {
    fn error(&mut self, span: &Span, message: impl Into<String>) {
        self.errors.push(ResolveError { span: span.clone(), message: message.into() });
    }

    fn class_decl(&self, name: &str) -> &'p ClassDecl {
        match &self.program.decls[self.classes[name].decl_idx] {
            Decl::Class(c) => c,
            Decl::Fun(_) => unreachable!(),
        }
    }

    // ---- phase 1: top-level names ----

    fn collect_decls(&mut self) {
        for (idx, decl) in self.program.decls.iter().enumerate() {
            match decl {
                Decl::Class(c) => {
                    if c.name.name == "print" {
                        self.error(&c.name.span, "`print` is reserved for the builtin");
                    } else if self.classes.contains_key(&c.name.name)
                        || self.functions.contains_key(&c.name.name)
                    {
                        self.error(
                            &c.name.span,
                            format!("duplicate top-level declaration of `{}`", c.name.name),
                        );
                    } else {
                        self.classes.insert(
                            c.name.name.clone(),
                            ClassInfo {
                                name: c.name.name.clone(),
                                base: c.base.as_ref().map(|b| b.name.clone()),
                                exported: c.exported,
                                decl_idx: idx,
                                chain: vec![c.name.name.clone()],
                                layout: Vec::new(),
                                friends: c.friends.iter().map(|f| f.name.name.clone()).collect(),
                            },
                        );
                    }
                }
                Decl::Fun(f) => {
                    if f.name.name == "print" {
                        self.error(&f.name.span, "`print` is reserved for the builtin");
                    } else if self.functions.contains_key(&f.name.name)
                        || self.classes.contains_key(&f.name.name)
                    {
                        self.error(
                            &f.name.span,
                            format!("duplicate top-level declaration of `{}`", f.name.name),
                        );
                    } else {
                        self.functions.insert(f.name.name.clone(), idx);
                    }
                }
            }
        }
    }

    // ---- phase 2: inheritance chains ----

    fn build_hierarchy(&mut self) {
        let names: Vec<String> = self.classes.keys().cloned().collect();
        for name in &names {
            let (base, name_span) = {
                let decl = self.class_decl(name);
                (decl.base.clone(), decl.name.span.clone())
            };
            if let Some(base) = &base {
                if !self.classes.contains_key(&base.name) {
                    self.error(
                        &base.span,
                        format!("base class `{}` of `{}` is not declared", base.name, name),
                    );
                }
            }
            // walk up, stopping on unknown bases or a cycle
            let mut chain = vec![name.clone()];
            let mut seen: BTreeSet<String> = BTreeSet::new();
            seen.insert(name.clone());
            let mut cur = base.map(|b| b.name);
            let mut cyclic = false;
            while let Some(c) = cur {
                if seen.contains(&c) {
                    cyclic = true;
                    break;
                }
                if !self.classes.contains_key(&c) {
                    break;
                }
                seen.insert(c.clone());
                chain.push(c.clone());
                cur = self.classes[&c].base.clone();
            }
            if cyclic {
                self.error(&name_span, format!("inheritance cycle through class `{name}`"));
                chain.truncate(1);
            }
            self.classes.get_mut(name).unwrap().chain = chain;
        }
    }

    // ---- phase 3: members, layouts, ctors, friends ----

    fn check_members(&mut self) {
        let names: Vec<String> = self.classes.keys().cloned().collect();

        for name in &names {
            let decl = self.class_decl(name);
            for m in &decl.methods {
                if m.is_virtual() {
                    self.virtual_names.insert(m.name.name.clone());
                }
            }
        }

        for name in &names {
            let decl = self.class_decl(name);
            let chain = self.classes[name].chain.clone();

            // field layout: root first, then down the chain
            let mut layout: Vec<FieldInfo> = Vec::new();
            for c in chain.iter().rev() {
                let cd = self.class_decl(c);
                for f in &cd.fields {
                    layout.push(FieldInfo {
                        name: f.name.name.clone(),
                        declaring: c.clone(),
                        vis: f.vis,
                        ty: f.ty.clone(),
                    });
                }
            }

            // duplicate fields within the class, shadowing across the chain
            let mut own_fields: BTreeSet<&str> = BTreeSet::new();
            for f in &decl.fields {
                if !own_fields.insert(&f.name.name) {
                    self.error(&f.name.span, format!("duplicate field `{}`", f.name.name));
                }
                for c in chain.iter().skip(1) {
                    if self.class_decl(c).fields.iter().any(|g| g.name.name == f.name.name) {
                        self.error(
                            &f.name.span,
                            format!("field `{}` shadows a field of base class `{c}`", f.name.name),
                        );
                    }
                }
            }

            // duplicate / hiding methods
            let mut own_methods: BTreeSet<&str> = BTreeSet::new();
            for m in &decl.methods {
                if !own_methods.insert(&m.name.name) {
                    self.error(&m.name.span, format!("duplicate method `{}`", m.name.name));
                }
                for c in chain.iter().skip(1) {
                    let cd = self.class_decl(c);
                    if let Some(inherited) = cd.methods.iter().find(|g| g.name.name == m.name.name)
                    {
                        if !inherited.is_virtual() {
                            self.error(
                                &m.name.span,
                                format!(
                                    "method `{}` hides a non-virtual method of base class `{c}`",
                                    m.name.name
                                ),
                            );
                        } else if inherited.params.len() != m.params.len() {
                            self.error(
                                &m.name.span,
                                format!(
                                    "override of `{}` changes arity ({} vs {} in `{c}`)",
                                    m.name.name,
                                    m.params.len(),
                                    inherited.params.len()
                                ),
                            );
                        } else if inherited
                            .params
                            .iter()
                            .zip(&m.params)
                            .any(|(a, b)| a.mode != b.mode)
                        {
                            self.error(
                                &m.name.span,
                                format!(
                                    "override of `{}` must keep the parameter modes of `{c}`",
                                    m.name.name
                                ),
                            );
                        }
                        break; // nearest declaration decides
                    }
                }
            }

            // constructors: unique arity, sane initializers
            let mut arities: BTreeSet<usize> = BTreeSet::new();
            for k in &decl.ctors {
                if !arities.insert(k.params.len()) {
                    self.error(
                        &k.name.span,
                        format!(
                            "duplicate constructor of `{}` with {} parameter(s)",
                            name,
                            k.params.len()
                        ),
                    );
                }
                let mut inited: BTreeSet<&str> = BTreeSet::new();
                for fi in &k.field_inits {
                    if !decl.fields.iter().any(|f| f.name.name == fi.name.name) {
                        self.error(
                            &fi.name.span,
                            format!("`{}` is not a field declared by class `{name}`", fi.name.name),
                        );
                    }
                    if !inited.insert(&fi.name.name) {
                        self.error(
                            &fi.name.span,
                            format!("field `{}` initialized twice", fi.name.name),
                        );
                    }
                }
                match (&k.base_init, &decl.base) {
                    (Some(b), Some(_)) => {
                        let base_name = &b.name.name;
                        if self.classes.contains_key(base_name) {
                            let has = self
                                .class_decl(base_name)
                                .ctors
                                .iter()
                                .any(|c| c.params.len() == b.args.len())
                                || (b.args.is_empty()
                                    && self.class_decl(base_name).ctors.is_empty());
                            if !has {
                                self.error(
                                    &b.name.span,
                                    format!(
                                        "base class `{base_name}` has no constructor taking {} argument(s)",
                                        b.args.len()
                                    ),
                                );
                            }
                        }
                    }
                    (None, Some(base)) => {
                        if self.classes.contains_key(&base.name) {
                            let bd = self.class_decl(&base.name);
                            let has_zero =
                                bd.ctors.is_empty() || bd.ctors.iter().any(|c| c.params.is_empty());
                            if !has_zero {
                                self.error(
                                    &k.name.span,
                                    format!(
                                        "constructor does not call a base constructor and `{}` has no zero-argument one",
                                        base.name
                                    ),
                                );
                            }
                        }
                    }
                    _ => {}
                }
            }

            // a based class with no ctors still implicitly constructs its base
            if decl.ctors.is_empty() {
                if let Some(base) = &decl.base {
                    if self.classes.contains_key(&base.name) {
                        let bd = self.class_decl(&base.name);
                        let has_zero =
                            bd.ctors.is_empty() || bd.ctors.iter().any(|c| c.params.is_empty());
                        if !has_zero {
                            self.error(
                                &decl.name.span,
                                format!(
                                    "class `{name}` has no constructor and base `{}` has no zero-argument one",
                                    base.name
                                ),
                            );
                        }
                    }
                }
            }

            // friends must name declared free functions
            for f in &decl.friends {
                if !self.functions.contains_key(&f.name.name) {
                    self.error(
                        &f.name.span,
                        format!("friend `{}` is not a declared function", f.name.name),
                    );
                }
            }

            self.classes.get_mut(name).unwrap().layout = layout;
        }
    }

    // ---- phase 4: bodies ----

    fn check_bodies(&mut self) {
        for decl in &self.program.decls {
            match decl {
                Decl::Fun(f) => {
                    let ctx = Ctx::Free(&f.name.name);
                    let mut scopes = Scopes::new();
                    self.bind_params(&mut scopes, &f.params);
                    self.block(&f.body, ctx, &mut scopes);
                }
                Decl::Class(c) => {
                    if !self.classes.contains_key(&c.name.name) {
                        continue; // duplicate class; first one wins
                    }
                    let ctx = Ctx::InClass(&c.name.name);
                    for m in &c.methods {
                        let mut scopes = Scopes::new();
                        scopes.bind_this();
                        self.bind_params(&mut scopes, &m.params);
                        self.block(&m.body, ctx, &mut scopes);
                    }
                    for k in &c.ctors {
                        let mut scopes = Scopes::new();
                        scopes.bind_this();
                        self.bind_params(&mut scopes, &k.params);
                        if let Some(b) = &k.base_init {
                            for a in &b.args {
                                self.expr(a, ctx, &mut scopes);
                            }
                        }
                        for fi in &k.field_inits {
                            self.expr(&fi.value, ctx, &mut scopes);
                        }
                        self.block(&k.body, ctx, &mut scopes);
                    }
                }
            }
        }
    }

    fn bind_params(&mut self, scopes: &mut Scopes, params: &[Param]) {
        for p in params {
            if p.name.name == "this" {
                self.error(&p.name.span, "`this` cannot be a parameter name");
                continue;
            }
            if let TypeRef::Class(c) = &p.ty {
                if !self.classes.contains_key(c) {
                    self.error(&p.name.span, format!("unknown class `{c}` in parameter type"));
                }
            }
            if !scopes.declare(&p.name.name) {
                self.error(&p.name.span, format!("duplicate parameter `{}`", p.name.name));
            }
        }
    }

    fn block(&mut self, b: &Block, ctx: Ctx<'_>, scopes: &mut Scopes) {
        scopes.push();
        for s in &b.stmts {
            self.stmt(s, ctx, scopes);
        }
        scopes.pop();
    }

    fn stmt(&mut self, s: &Stmt, ctx: Ctx<'_>, scopes: &mut Scopes) {
        match &s.kind {
            StmtKind::Let { name, value } => {
                self.expr(value, ctx, scopes);
                if name.name == "this" {
                    self.error(&name.span, "cannot declare `this`");
                } else if !scopes.declare(&name.name) {
                    self.error(
                        &name.span,
                        format!("duplicate definition of `{}` in this scope", name.name),
                    );
                }
            }
            StmtKind::Assign { target, value } => {
                self.expr(value, ctx, scopes);
                match target {
                    AssignTarget::Var { id, name } => {
                        match self.lookup_var(&name.name, ctx, scopes) {
                            Some(VarKind::This) => {
                                self.error(&name.span, "cannot assign to `this`")
                            }
                            Some(kind) => {
                                self.var_kinds.insert(*id, kind);
                            }
                            None => self.error(
                                &name.span,
                                format!("unbound name `{}` in assignment", name.name),
                            ),
                        }
                    }
                    AssignTarget::Field { base, name } => {
                        self.expr(base, ctx, scopes);
                        self.check_field_access(name, ctx);
                    }
                }
            }
            StmtKind::If { cond, then_block, else_block } => {
                self.expr(cond, ctx, scopes);
                self.block(then_block, ctx, scopes);
                if let Some(e) = else_block {
                    self.block(e, ctx, scopes);
                }
            }
            StmtKind::While { cond, body } => {
                self.expr(cond, ctx, scopes);
                self.block(body, ctx, scopes);
            }
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    self.expr(e, ctx, scopes);
                }
            }
            StmtKind::Assert(e) | StmtKind::Expr(e) => self.expr(e, ctx, scopes),
        }
    }

    fn lookup_var(&self, name: &str, ctx: Ctx<'_>, scopes: &Scopes) -> Option<VarKind> {
        if name == "this" {
            return match ctx {
                Ctx::InClass(_) => Some(VarKind::This),
                Ctx::Free(_) => None,
            };
        }
        if scopes.is_declared(name) {
            return Some(VarKind::Local);
        }
        if let Ctx::InClass(class) = ctx {
            if let Some(info) = self.classes.get(class) {
                if info.layout.iter().any(|f| f.name == name) {
                    return Some(VarKind::Field);
                }
            }
        }
        None
    }

    fn field_accessible(&self, f: &FieldInfo, ctx: Ctx<'_>) -> bool {
        match f.vis {
            Vis::Public => true,
            Vis::Private => match ctx {
                Ctx::InClass(c) => c == f.declaring,
                Ctx::Free(name) => self.classes[&f.declaring].friends.contains(name),
            },
        }
    }

    /// `expr.name` / `expr.name = …`: the field must be declared somewhere,
    /// and at least one declaration must be visible from here.
    fn check_field_access(&mut self, name: &Ident, ctx: Ctx<'_>) {
        let mut declared = false;
        let mut accessible = false;
        for info in self.classes.values() {
            let cd = self.class_decl(&info.name);
            for f in &cd.fields {
                if f.name.name == name.name {
                    declared = true;
                    let fi = FieldInfo {
                        name: f.name.name.clone(),
                        declaring: info.name.clone(),
                        vis: f.vis,
                        ty: f.ty.clone(),
                    };
                    if self.field_accessible(&fi, ctx) {
                        accessible = true;
                    }
                }
            }
        }
        if !declared {
            self.error(&name.span, format!("no class declares a field `{}`", name.name));
        } else if !accessible {
            self.error(&name.span, format!("field `{}` is private here", name.name));
        }
    }

    fn method_accessible(&self, declaring: &str, vis: Vis, ctx: Ctx<'_>) -> bool {
        match vis {
            Vis::Public => true,
            Vis::Private => match ctx {
                Ctx::InClass(c) => c == declaring,
                Ctx::Free(name) => self.classes[declaring].friends.contains(name),
            },
        }
    }

    fn check_ref_args(&mut self, params: &[Param], args: &[Expr], what: &str) {
        for (p, a) in params.iter().zip(args) {
            if p.mode == Mode::Ref {
                // must alias a slot: a local or `this` (fields live in the
                // object store, not in environment slots)
                let ok =
                    matches!(self.var_kinds.get(&a.id), Some(VarKind::Local) | Some(VarKind::This));
                if !ok {
                    self.error(
                        &a.span,
                        format!(
                            "argument for `ref` parameter `{}` of {what} must be a local variable",
                            p.name.name
                        ),
                    );
                }
            }
        }
    }

    fn expr(&mut self, e: &Expr, ctx: Ctx<'_>, scopes: &mut Scopes) {
        match &e.kind {
            ExprKind::IntLit(_) | ExprKind::BoolLit(_) | ExprKind::Nil => {}
            ExprKind::Var(name) => match self.lookup_var(name, ctx, scopes) {
                Some(kind) => {
                    if kind == VarKind::Field {
                        // bare access to an inherited private field is illegal
                        if let Ctx::InClass(class) = ctx {
                            let info = &self.classes[class];
                            let f = info.layout.iter().find(|f| f.name == *name).unwrap().clone();
                            if !self.field_accessible(&f, ctx) {
                                self.error(
                                    &e.span,
                                    format!(
                                        "field `{name}` of base class `{}` is private",
                                        f.declaring
                                    ),
                                );
                            }
                        }
                    }
                    self.var_kinds.insert(e.id, kind);
                }
                None => self.error(&e.span, format!("unbound name `{name}`")),
            },
            ExprKind::Field { base, name } => {
                self.expr(base, ctx, scopes);
                self.check_field_access(name, ctx);
            }
            ExprKind::MethodCall { recv, name, args } => {
                self.expr(recv, ctx, scopes);
                for a in args {
                    self.expr(a, ctx, scopes);
                }
                self.resolve_method_site(e.id, name, args, ctx);
            }
            ExprKind::Call { name, args } => {
                for a in args {
                    self.expr(a, ctx, scopes);
                }
                self.resolve_call_site(e.id, name, args, ctx);
            }
            ExprKind::New { class, args } => {
                for a in args {
                    self.expr(a, ctx, scopes);
                }
                match self.classes.get(&class.name) {
                    None => {
                        self.error(&class.span, format!("unknown class `{}`", class.name));
                    }
                    Some(_) => {
                        let cd = self.class_decl(&class.name);
                        let ctor = cd.ctors.iter().find(|c| c.params.len() == args.len());
                        match ctor {
                            Some(k) => {
                                let params = k.params.clone();
                                self.check_ref_args(
                                    &params,
                                    args,
                                    &format!("constructor `{}`", class.name),
                                );
                            }
                            None => {
                                if !(args.is_empty() && cd.ctors.is_empty()) {
                                    self.error(
                                        &class.span,
                                        format!(
                                            "class `{}` has no constructor taking {} argument(s)",
                                            class.name,
                                            args.len()
                                        ),
                                    );
                                }
                            }
                        }
                    }
                }
            }
            ExprKind::Cons { head, tail } => {
                self.expr(head, ctx, scopes);
                self.expr(tail, ctx, scopes);
            }
            ExprKind::Head(x) | ExprKind::Tail(x) | ExprKind::IsNil(x) => self.expr(x, ctx, scopes),
            ExprKind::Unary { operand, .. } => self.expr(operand, ctx, scopes),
            ExprKind::Binary { lhs, rhs, .. } => {
                self.expr(lhs, ctx, scopes);
                self.expr(rhs, ctx, scopes);
            }
        }
    }

    /// `recv.m(args)`: require a declaration of `m` with this arity to exist
    /// and be visible; classify the site as virtual or static.
    fn resolve_method_site(&mut self, site: NodeId, name: &Ident, args: &[Expr], ctx: Ctx<'_>) {
        let mut declared = false;
        let mut arity_ok = false;
        let mut visible = false;
        let mut ref_modes: Option<Vec<bool>> = None; // and-fold over candidates
        let class_names: Vec<String> = self.classes.keys().cloned().collect();
        for cname in &class_names {
            let cd = self.class_decl(cname);
            let Some(m) = cd.methods.iter().find(|m| m.name.name == name.name) else {
                continue;
            };
            declared = true;
            if m.params.len() != args.len() {
                continue;
            }
            arity_ok = true;
            if self.method_accessible(cname, m.vis, ctx) {
                visible = true;
            }
            let modes: Vec<bool> = m.params.iter().map(|p| p.mode == Mode::Ref).collect();
            ref_modes = Some(match ref_modes {
                None => modes,
                Some(prev) => prev.iter().zip(&modes).map(|(a, b)| *a && *b).collect(),
            });
        }
        if !declared {
            self.error(&name.span, format!("no class declares a method `{}`", name.name));
            return;
        }
        if !arity_ok {
            self.error(
                &name.span,
                format!(
                    "no declaration of method `{}` takes {} argument(s)",
                    name.name,
                    args.len()
                ),
            );
            return;
        }
        if !visible {
            self.error(&name.span, format!("method `{}` is private here", name.name));
            return;
        }
        // `ref` positions are enforced only where every candidate demands one
        if let Some(modes) = ref_modes {
            for (i, is_ref) in modes.iter().enumerate() {
                if *is_ref {
                    let a = &args[i];
                    let ok = matches!(
                        self.var_kinds.get(&a.id),
                        Some(VarKind::Local) | Some(VarKind::This)
                    );
                    if !ok {
                        self.error(
                            &a.span,
                            format!(
                                "argument {} of method `{}` must be a local variable (ref parameter)",
                                i + 1,
                                name.name
                            ),
                        );
                    }
                }
            }
        }
        let d = if self.virtual_names.contains(&name.name) {
            Dispatch::Virtual
        } else {
            Dispatch::Static
        };
        self.dispatch.insert(site, d);
    }

    /// `name(args)`: a method of the enclosing class, a free function, or
    /// the `print` builtin — in that order.
    fn resolve_call_site(&mut self, site: NodeId, name: &Ident, args: &[Expr], ctx: Ctx<'_>) {
        if let Ctx::InClass(class) = ctx {
            let chain = self.classes[class].chain.clone();
            for cname in &chain {
                let cd = self.class_decl(cname);
                if let Some(m) = cd.methods.iter().find(|m| m.name.name == name.name) {
                    if !self.method_accessible(cname, m.vis, ctx) {
                        self.error(
                            &name.span,
                            format!("method `{}` of class `{cname}` is private", name.name),
                        );
                        return;
                    }
                    if m.params.len() != args.len() {
                        self.error(
                            &name.span,
                            format!(
                                "method `{}` takes {} argument(s), {} given",
                                name.name,
                                m.params.len(),
                                args.len()
                            ),
                        );
                        return;
                    }
                    let params = m.params.clone();
                    self.check_ref_args(&params, args, &format!("method `{}`", name.name));
                    self.call_kinds.insert(site, CallKind::MethodOnThis(name.name.clone()));
                    let d = if self.virtual_names.contains(&name.name) {
                        Dispatch::Virtual
                    } else {
                        Dispatch::Static
                    };
                    self.dispatch.insert(site, d);
                    return;
                }
            }
        }
        if let Some(&idx) = self.functions.get(&name.name) {
            let Decl::Fun(f) = &self.program.decls[idx] else { unreachable!() };
            if f.params.len() != args.len() {
                self.error(
                    &name.span,
                    format!(
                        "function `{}` takes {} argument(s), {} given",
                        name.name,
                        f.params.len(),
                        args.len()
                    ),
                );
                return;
            }
            let params = f.params.clone();
            self.check_ref_args(&params, args, &format!("function `{}`", name.name));
            self.call_kinds.insert(site, CallKind::Function(name.name.clone()));
            return;
        }
        if name.name == "print" {
            if args.len() != 1 {
                self.error(&name.span, "print takes exactly one argument");
                return;
            }
            self.call_kinds.insert(site, CallKind::Print);
            return;
        }
        self.error(&name.span, format!("unbound function `{}`", name.name));
    }
}

struct Scopes {
    stack: Vec<BTreeSet<String>>,
    has_this: bool,
}

impl Scopes {
    fn new() -> Scopes {
        Scopes { stack: vec![BTreeSet::new()], has_this: false }
    }

    fn bind_this(&mut self) {
        self.has_this = true;
    }

    fn push(&mut self) {
        self.stack.push(BTreeSet::new());
    }

    fn pop(&mut self) {
        self.stack.pop();
    }

    fn declare(&mut self, name: &str) -> bool {
        self.stack.last_mut().unwrap().insert(name.to_string())
    }

    fn is_declared(&self, name: &str) -> bool {
        self.stack.iter().any(|s| s.contains(name))
    }
}
