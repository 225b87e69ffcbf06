//! Tree-walking interpreter. A `Session` owns an object store, captured
//! print output and the list of failed assertions, and evaluates calls
//! against a shared `ResolvedProgram`. Sessions are deliberately cheap:
//! the behavioral harness creates one per contract case / input tuple so
//! evaluations can never contaminate each other. They are not thread-safe;
//! parallel searches give each task its own.
//!
//! Semantics notes:
//!
//! * integers are 64-bit and wrap on overflow; `/` and `%` truncate and
//!   trap on zero;
//! * objects have reference semantics, lists are persistent values;
//! * method calls resolve on the dynamic class of the receiver — because
//!   the resolver rejects hiding, "first declaration walking up the chain"
//!   serves virtual and non-virtual calls alike;
//! * `constref` freezes the received object transitively-on-read: any
//!   object read out of a frozen object is frozen too, and writes through
//!   frozen references abort with `ConstWrite`;
//! * failed `assert`s are recorded with their spans and execution
//!   continues, so one broken expectation cannot mask later ones.

pub mod value;

use crate::ast::*;
use crate::resolve::{CallKind, ResolvedProgram, VarKind};
use crate::span::Span;
use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;
pub use value::{format_value, value_eq, ObjRef, PList, Value};

/// Frames of MiniOO calls, not Rust frames. Corpus recursion is bounded by
/// list lengths; the cap mainly turns runaway recursion into a clean error.
pub const MAX_CALL_DEPTH: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuntimeErrorKind {
    HeadOfNil,
    TailOfNil,
    DivisionByZero,
    MissingMethod,
    MissingField,
    UninitializedField,
    ConstWrite,
    TypeMismatch,
    ArityMismatch,
    UnknownFunction,
    NoMain,
    StackOverflow,
}

impl RuntimeErrorKind {
    /// Stable label used when comparing outcomes across runs.
    pub fn label(self) -> &'static str {
        match self {
            RuntimeErrorKind::HeadOfNil => "head-of-nil",
            RuntimeErrorKind::TailOfNil => "tail-of-nil",
            RuntimeErrorKind::DivisionByZero => "division-by-zero",
            RuntimeErrorKind::MissingMethod => "missing-method",
            RuntimeErrorKind::MissingField => "missing-field",
            RuntimeErrorKind::UninitializedField => "uninitialized-field",
            RuntimeErrorKind::ConstWrite => "const-write",
            RuntimeErrorKind::TypeMismatch => "type-mismatch",
            RuntimeErrorKind::ArityMismatch => "arity-mismatch",
            RuntimeErrorKind::UnknownFunction => "unknown-function",
            RuntimeErrorKind::NoMain => "no-main",
            RuntimeErrorKind::StackOverflow => "stack-overflow",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RuntimeError {
    pub kind: RuntimeErrorKind,
    pub span: Span,
    pub message: String,
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: runtime error: {}", self.span, self.message)
    }
}

impl std::error::Error for RuntimeError {}

/// Result of running a program or a single function call.
#[derive(Debug)]
pub struct ExecOutcome {
    pub result: Result<Value, RuntimeError>,
    pub output: Vec<String>,
    pub assertions_failed: Vec<Span>,
}

#[derive(Debug)]
pub struct ObjData {
    pub class: String,
    pub fields: Vec<Option<Value>>,
}

#[derive(Debug, Default)]
pub struct ObjectStore {
    objs: Vec<ObjData>,
}

impl ObjectStore {
    pub fn alloc(&mut self, class: String, nfields: usize) -> usize {
        self.objs.push(ObjData { class, fields: vec![None; nfields] });
        self.objs.len() - 1
    }

    pub fn get(&self, id: usize) -> &ObjData {
        &self.objs[id]
    }

    pub fn get_mut(&mut self, id: usize) -> &mut ObjData {
        &mut self.objs[id]
    }
}

#[derive(Clone)]
struct Binding {
    slot: Rc<RefCell<Value>>,
    readonly: bool,
}

impl Binding {
    fn fresh(v: Value) -> Binding {
        Binding { slot: Rc::new(RefCell::new(v)), readonly: false }
    }

    fn frozen(v: Value) -> Binding {
        Binding { slot: Rc::new(RefCell::new(v)), readonly: true }
    }
}

struct Env {
    scopes: Vec<Vec<(String, Binding)>>,
}

impl Env {
    fn new() -> Env {
        Env { scopes: vec![Vec::new()] }
    }

    fn push(&mut self) {
        self.scopes.push(Vec::new());
    }

    fn pop(&mut self) {
        self.scopes.pop();
    }

    fn declare(&mut self, name: &str, b: Binding) {
        self.scopes.last_mut().unwrap().push((name.to_string(), b));
    }

    fn lookup(&self, name: &str) -> Option<&Binding> {
        for scope in self.scopes.iter().rev() {
            if let Some((_, b)) = scope.iter().rev().find(|(n, _)| n == name) {
                return Some(b);
            }
        }
        None
    }
}

enum Flow {
    Normal,
    Return(Value),
}

pub struct Session<'p> {
    prog: &'p ResolvedProgram,
    pub store: ObjectStore,
    pub output: Vec<String>,
    pub assertions_failed: Vec<Span>,
    depth: usize,
}

impl<'p> Session<'p> {
    pub fn new(prog: &'p ResolvedProgram) -> Session<'p> {
        Session {
            prog,
            store: ObjectStore::default(),
            output: Vec::new(),
            assertions_failed: Vec::new(),
            depth: 0,
        }
    }

    /// Call a free function with host-supplied argument values. `ref`
    /// parameters get fresh slots (reassignment inside the callee is
    /// invisible to the host), `constref` parameters freeze their value.
    pub fn call(&mut self, name: &str, args: Vec<Value>) -> Result<Value, RuntimeError> {
        let span = Span::synthetic("<host>");
        let prog = self.prog;
        let Some(f) = prog.fun_decl(name) else {
            return Err(RuntimeError {
                kind: RuntimeErrorKind::UnknownFunction,
                span,
                message: format!("no function named `{name}`"),
            });
        };
        if f.params.len() != args.len() {
            return Err(RuntimeError {
                kind: RuntimeErrorKind::ArityMismatch,
                span,
                message: format!(
                    "function `{name}` takes {} argument(s), {} given",
                    f.params.len(),
                    args.len()
                ),
            });
        }
        let mut env = Env::new();
        for (p, v) in f.params.iter().zip(args) {
            let b = match p.mode {
                Mode::Value | Mode::Ref => Binding::fresh(v),
                Mode::ConstRef => Binding::frozen(freeze_value(v)),
            };
            env.declare(&p.name.name, b);
        }
        self.frame(&span, |s| match s.exec_block(&f.body, &mut env)? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(Value::Unit),
        })
    }

    /// Host-initiated `new class(args)`.
    pub fn construct(&mut self, class: &str, args: Vec<Value>) -> Result<Value, RuntimeError> {
        let span = Span::synthetic("<host>");
        if !self.prog.classes.contains_key(class) {
            return Err(RuntimeError {
                kind: RuntimeErrorKind::UnknownFunction,
                span,
                message: format!("no class named `{class}`"),
            });
        }
        let nfields = self.prog.classes[class].layout.len();
        let id = self.store.alloc(class.to_string(), nfields);
        let bindings = args.into_iter().map(Binding::fresh).collect();
        self.run_ctor(id, class, bindings, &span)?;
        Ok(Value::Obj(ObjRef { id, frozen: false }))
    }

    /// Host-initiated `recv.name(args)`, dispatched on the receiver's
    /// dynamic class exactly like a method call in source.
    pub fn call_method_host(
        &mut self,
        recv: &Value,
        name: &str,
        args: Vec<Value>,
    ) -> Result<Value, RuntimeError> {
        let span = Span::synthetic("<host>");
        let Value::Obj(obj) = recv.clone() else {
            return Err(RuntimeError {
                kind: RuntimeErrorKind::TypeMismatch,
                span,
                message: format!("method call requires an object, got {}", recv.type_name()),
            });
        };
        let class = self.store.get(obj.id).class.clone();
        let prog = self.prog;
        let Some((_, m)) = prog.method_in(&class, name) else {
            return Err(RuntimeError {
                kind: RuntimeErrorKind::MissingMethod,
                span,
                message: format!("class `{class}` has no method `{name}`"),
            });
        };
        if m.params.len() != args.len() {
            return Err(RuntimeError {
                kind: RuntimeErrorKind::ArityMismatch,
                span,
                message: format!(
                    "method `{name}` takes {} argument(s), {} given",
                    m.params.len(),
                    args.len()
                ),
            });
        }
        let mut env = Env::new();
        env.declare("this", Binding::frozen(Value::Obj(obj)));
        for (p, v) in m.params.iter().zip(args) {
            let b = match p.mode {
                Mode::Value | Mode::Ref => Binding::fresh(v),
                Mode::ConstRef => Binding::frozen(freeze_value(v)),
            };
            env.declare(&p.name.name, b);
        }
        self.frame(&span, |s| match s.exec_block(&m.body, &mut env)? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(Value::Unit),
        })
    }

    /// The dynamic class of an object value, for harness introspection.
    pub fn class_of(&self, v: &Value) -> Option<&str> {
        match v {
            Value::Obj(o) => Some(self.store.get(o.id).class.as_str()),
            _ => None,
        }
    }

    fn frame<T>(
        &mut self,
        span: &Span,
        f: impl FnOnce(&mut Self) -> Result<T, RuntimeError>,
    ) -> Result<T, RuntimeError> {
        if self.depth >= MAX_CALL_DEPTH {
            return Err(RuntimeError {
                kind: RuntimeErrorKind::StackOverflow,
                span: span.clone(),
                message: format!("call depth exceeded {MAX_CALL_DEPTH} frames"),
            });
        }
        self.depth += 1;
        let r = f(self);
        self.depth -= 1;
        r
    }

    fn err<T>(
        &self,
        kind: RuntimeErrorKind,
        span: &Span,
        message: impl Into<String>,
    ) -> Result<T, RuntimeError> {
        Err(RuntimeError { kind, span: span.clone(), message: message.into() })
    }

    // ---- statements ----

    fn exec_block(&mut self, b: &Block, env: &mut Env) -> Result<Flow, RuntimeError> {
        env.push();
        let r = self.exec_stmts(&b.stmts, env);
        env.pop();
        r
    }

    fn exec_stmts(&mut self, stmts: &[Stmt], env: &mut Env) -> Result<Flow, RuntimeError> {
        for s in stmts {
            match self.exec_stmt(s, env)? {
                Flow::Normal => {}
                flow => return Ok(flow),
            }
        }
        Ok(Flow::Normal)
    }

    fn exec_stmt(&mut self, s: &Stmt, env: &mut Env) -> Result<Flow, RuntimeError> {
        match &s.kind {
            StmtKind::Let { name, value } => {
                let v = self.eval(value, env)?;
                env.declare(&name.name, Binding::fresh(v));
                Ok(Flow::Normal)
            }
            StmtKind::Assign { target, value } => {
                let v = self.eval(value, env)?;
                self.assign(target, v, &s.span, env)?;
                Ok(Flow::Normal)
            }
            StmtKind::If { cond, then_block, else_block } => {
                if self.eval_bool(cond, env)? {
                    self.exec_block(then_block, env)
                } else if let Some(e) = else_block {
                    self.exec_block(e, env)
                } else {
                    Ok(Flow::Normal)
                }
            }
            StmtKind::While { cond, body } => {
                while self.eval_bool(cond, env)? {
                    match self.exec_block(body, env)? {
                        Flow::Normal => {}
                        flow => return Ok(flow),
                    }
                }
                Ok(Flow::Normal)
            }
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(e, env)?,
                    None => Value::Unit,
                };
                Ok(Flow::Return(v))
            }
            StmtKind::Assert(cond) => {
                if !self.eval_bool(cond, env)? {
                    self.assertions_failed.push(s.span.clone());
                }
                Ok(Flow::Normal)
            }
            StmtKind::Expr(e) => {
                self.eval(e, env)?;
                Ok(Flow::Normal)
            }
        }
    }

    fn assign(
        &mut self,
        target: &AssignTarget,
        v: Value,
        span: &Span,
        env: &mut Env,
    ) -> Result<(), RuntimeError> {
        match target {
            AssignTarget::Var { id, name } => match self.prog.var_kinds.get(id) {
                Some(VarKind::Local) => {
                    let b = env.lookup(&name.name).expect("resolved local").clone();
                    if b.readonly {
                        return self.err(
                            RuntimeErrorKind::ConstWrite,
                            span,
                            format!("cannot assign to constref binding `{}`", name.name),
                        );
                    }
                    *b.slot.borrow_mut() = v;
                    Ok(())
                }
                Some(VarKind::Field) => {
                    let this = self.this_obj(env, span)?;
                    self.write_field(this, &name.name, v, span)
                }
                _ => self.err(
                    RuntimeErrorKind::TypeMismatch,
                    span,
                    format!("`{}` is not assignable", name.name),
                ),
            },
            AssignTarget::Field { base, name } => {
                let obj = self.eval_obj(base, env, "field assignment")?;
                self.write_field(obj, &name.name, v, span)
            }
        }
    }

    fn this_obj(&mut self, env: &Env, span: &Span) -> Result<ObjRef, RuntimeError> {
        let b = env.lookup("this").expect("resolved `this`").clone();
        let v = b.slot.borrow().clone();
        match v {
            Value::Obj(o) => Ok(o),
            _ => self.err(RuntimeErrorKind::TypeMismatch, span, "`this` is not an object"),
        }
    }

    fn write_field(
        &mut self,
        obj: ObjRef,
        field: &str,
        v: Value,
        span: &Span,
    ) -> Result<(), RuntimeError> {
        if obj.frozen {
            return self.err(
                RuntimeErrorKind::ConstWrite,
                span,
                format!("cannot write field `{field}` through a constref"),
            );
        }
        let class = self.store.get(obj.id).class.clone();
        let Some(slot) = self.prog.field_slot(&class, field) else {
            return self.err(
                RuntimeErrorKind::MissingField,
                span,
                format!("class `{class}` has no field `{field}`"),
            );
        };
        self.store.get_mut(obj.id).fields[slot] = Some(v);
        Ok(())
    }

    fn read_field(&mut self, obj: ObjRef, field: &str, span: &Span) -> Result<Value, RuntimeError> {
        let class = self.store.get(obj.id).class.clone();
        let Some(slot) = self.prog.field_slot(&class, field) else {
            return self.err(
                RuntimeErrorKind::MissingField,
                span,
                format!("class `{class}` has no field `{field}`"),
            );
        };
        match &self.store.get(obj.id).fields[slot] {
            Some(v) => {
                let v = v.clone();
                Ok(if obj.frozen { freeze_value(v) } else { v })
            }
            None => self.err(
                RuntimeErrorKind::UninitializedField,
                span,
                format!("field `{field}` of class `{class}` read before initialization"),
            ),
        }
    }

    // ---- expressions ----

    fn eval_bool(&mut self, e: &Expr, env: &mut Env) -> Result<bool, RuntimeError> {
        match self.eval(e, env)? {
            Value::Bool(b) => Ok(b),
            v => self.err(
                RuntimeErrorKind::TypeMismatch,
                &e.span,
                format!("expected a boolean, got {}", v.type_name()),
            ),
        }
    }

    fn eval_int(&mut self, e: &Expr, env: &mut Env) -> Result<i64, RuntimeError> {
        match self.eval(e, env)? {
            Value::Int(n) => Ok(n),
            v => self.err(
                RuntimeErrorKind::TypeMismatch,
                &e.span,
                format!("expected an int, got {}", v.type_name()),
            ),
        }
    }

    fn eval_list(&mut self, e: &Expr, env: &mut Env, what: &str) -> Result<PList, RuntimeError> {
        match self.eval(e, env)? {
            Value::List(l) => Ok(l),
            v => self.err(
                RuntimeErrorKind::TypeMismatch,
                &e.span,
                format!("{what} expects a list, got {}", v.type_name()),
            ),
        }
    }

    fn eval_obj(&mut self, e: &Expr, env: &mut Env, what: &str) -> Result<ObjRef, RuntimeError> {
        match self.eval(e, env)? {
            Value::Obj(o) => Ok(o),
            v => self.err(
                RuntimeErrorKind::TypeMismatch,
                &e.span,
                format!("{what} requires an object, got {}", v.type_name()),
            ),
        }
    }

    fn eval(&mut self, e: &Expr, env: &mut Env) -> Result<Value, RuntimeError> {
        match &e.kind {
            ExprKind::IntLit(n) => Ok(Value::Int(*n)),
            ExprKind::BoolLit(b) => Ok(Value::Bool(*b)),
            ExprKind::Nil => Ok(Value::List(PList::nil())),
            ExprKind::Var(name) => match self.prog.var_kinds.get(&e.id) {
                Some(VarKind::Local) | Some(VarKind::This) => {
                    let b = env.lookup(name).expect("resolved variable");
                    let v = b.slot.borrow().clone();
                    Ok(v)
                }
                Some(VarKind::Field) => {
                    let this = self.this_obj(env, &e.span)?;
                    self.read_field(this, name, &e.span)
                }
                None => self.err(
                    RuntimeErrorKind::TypeMismatch,
                    &e.span,
                    format!("unresolved name `{name}`"),
                ),
            },
            ExprKind::Field { base, name } => {
                let obj = self.eval_obj(base, env, "field access")?;
                self.read_field(obj, &name.name, &name.span)
            }
            ExprKind::MethodCall { recv, name, args } => {
                let obj = self.eval_obj(recv, env, &format!("calling `{}`", name.name))?;
                self.call_method(obj, name, args, env)
            }
            ExprKind::Call { name, args } => match self.prog.call_kinds.get(&e.id) {
                Some(CallKind::Print) => {
                    let v = self.eval(&args[0], env)?;
                    match format_value(&v) {
                        Some(s) => {
                            self.output.push(s);
                            Ok(Value::Unit)
                        }
                        None => self.err(
                            RuntimeErrorKind::TypeMismatch,
                            &e.span,
                            "cannot print an object",
                        ),
                    }
                }
                Some(CallKind::Function(fname)) => {
                    let prog = self.prog;
                    let f = prog.fun_decl(fname).expect("resolved function");
                    let bindings = self.bind_args(&f.params, args, env)?;
                    let mut callee = Env::new();
                    for (p, b) in f.params.iter().zip(bindings) {
                        callee.declare(&p.name.name, b);
                    }
                    self.frame(&e.span, |s| match s.exec_block(&f.body, &mut callee)? {
                        Flow::Return(v) => Ok(v),
                        Flow::Normal => Ok(Value::Unit),
                    })
                }
                Some(CallKind::MethodOnThis(mname)) => {
                    let this = self.this_obj(env, &e.span)?;
                    let name = Ident { name: mname.clone(), span: e.span.clone() };
                    self.call_method(this, &name, args, env)
                }
                None => self.err(
                    RuntimeErrorKind::UnknownFunction,
                    &e.span,
                    format!("unresolved call `{}`", name.name),
                ),
            },
            ExprKind::New { class, args } => {
                let prog = self.prog;
                let nfields = prog.classes[&class.name].layout.len();
                let arity = args.len();
                let bindings = match prog.ctor_of(&class.name, arity) {
                    Some(ctor) => self.bind_args(&ctor.params, args, env)?,
                    None => {
                        // implicit zero-argument constructor
                        if !(arity == 0 && prog.has_implicit_default_ctor(&class.name)) {
                            return self.err(
                                RuntimeErrorKind::ArityMismatch,
                                &e.span,
                                format!(
                                    "class `{}` has no constructor taking {arity} argument(s)",
                                    class.name
                                ),
                            );
                        }
                        Vec::new()
                    }
                };
                let id = self.store.alloc(class.name.clone(), nfields);
                self.run_ctor(id, &class.name, bindings, &e.span)?;
                Ok(Value::Obj(ObjRef { id, frozen: false }))
            }
            ExprKind::Cons { head, tail } => {
                let h = self.eval(head, env)?;
                let t = self.eval_list(tail, env, "cons")?;
                Ok(Value::List(PList::cons(h, &t)))
            }
            ExprKind::Head(x) => {
                let l = self.eval_list(x, env, "head")?;
                match l.head() {
                    Some(v) => Ok(v.clone()),
                    None => self.err(RuntimeErrorKind::HeadOfNil, &e.span, "head of nil"),
                }
            }
            ExprKind::Tail(x) => {
                let l = self.eval_list(x, env, "tail")?;
                match l.tail() {
                    Some(t) => Ok(Value::List(t)),
                    None => self.err(RuntimeErrorKind::TailOfNil, &e.span, "tail of nil"),
                }
            }
            ExprKind::IsNil(x) => {
                let l = self.eval_list(x, env, "is_nil")?;
                Ok(Value::Bool(l.is_nil()))
            }
            ExprKind::Unary { op, operand } => match op {
                UnOp::Neg => Ok(Value::Int(self.eval_int(operand, env)?.wrapping_neg())),
                UnOp::Not => Ok(Value::Bool(!self.eval_bool(operand, env)?)),
            },
            ExprKind::Binary { op, lhs, rhs } => self.eval_binary(*op, lhs, rhs, &e.span, env),
        }
    }

    fn eval_binary(
        &mut self,
        op: BinOp,
        lhs: &Expr,
        rhs: &Expr,
        span: &Span,
        env: &mut Env,
    ) -> Result<Value, RuntimeError> {
        match op {
            BinOp::And => {
                if !self.eval_bool(lhs, env)? {
                    return Ok(Value::Bool(false));
                }
                Ok(Value::Bool(self.eval_bool(rhs, env)?))
            }
            BinOp::Or => {
                if self.eval_bool(lhs, env)? {
                    return Ok(Value::Bool(true));
                }
                Ok(Value::Bool(self.eval_bool(rhs, env)?))
            }
            BinOp::Eq | BinOp::Ne => {
                let a = self.eval(lhs, env)?;
                let b = self.eval(rhs, env)?;
                match value_eq(&a, &b) {
                    Ok(eq) => Ok(Value::Bool(if op == BinOp::Eq { eq } else { !eq })),
                    Err((ta, tb)) => self.err(
                        RuntimeErrorKind::TypeMismatch,
                        span,
                        format!("cannot compare {ta} with {tb}"),
                    ),
                }
            }
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                let a = self.eval_int(lhs, env)?;
                let b = self.eval_int(rhs, env)?;
                let r = match op {
                    BinOp::Lt => a < b,
                    BinOp::Le => a <= b,
                    BinOp::Gt => a > b,
                    _ => a >= b,
                };
                Ok(Value::Bool(r))
            }
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => {
                let a = self.eval_int(lhs, env)?;
                let b = self.eval_int(rhs, env)?;
                let r = match op {
                    BinOp::Add => a.wrapping_add(b),
                    BinOp::Sub => a.wrapping_sub(b),
                    BinOp::Mul => a.wrapping_mul(b),
                    BinOp::Div | BinOp::Rem => {
                        if b == 0 {
                            return self.err(
                                RuntimeErrorKind::DivisionByZero,
                                span,
                                "division by zero",
                            );
                        }
                        if op == BinOp::Div {
                            a.wrapping_div(b)
                        } else {
                            a.wrapping_rem(b)
                        }
                    }
                    _ => unreachable!(),
                };
                Ok(Value::Int(r))
            }
        }
    }

    // ---- calls ----

    /// Evaluate call arguments against parameter modes. `ref` shares the
    /// caller's slot (the resolver guarantees the argument is a local or
    /// `this`), `constref` freezes, plain parameters copy the value.
    fn bind_args(
        &mut self,
        params: &[Param],
        args: &[Expr],
        env: &mut Env,
    ) -> Result<Vec<Binding>, RuntimeError> {
        let mut out = Vec::with_capacity(args.len());
        for (p, a) in params.iter().zip(args) {
            let b = match p.mode {
                Mode::Value => Binding::fresh(self.eval(a, env)?),
                Mode::Ref => {
                    let ExprKind::Var(name) = &a.kind else {
                        return self.err(
                            RuntimeErrorKind::TypeMismatch,
                            &a.span,
                            "ref argument must be a variable",
                        );
                    };
                    env.lookup(name).expect("resolved ref argument").clone()
                }
                Mode::ConstRef => Binding::frozen(freeze_value(self.eval(a, env)?)),
            };
            out.push(b);
        }
        Ok(out)
    }

    fn call_method(
        &mut self,
        obj: ObjRef,
        name: &Ident,
        args: &[Expr],
        env: &mut Env,
    ) -> Result<Value, RuntimeError> {
        let class = self.store.get(obj.id).class.clone();
        let prog = self.prog;
        let Some((_, m)) = prog.method_in(&class, &name.name) else {
            return self.err(
                RuntimeErrorKind::MissingMethod,
                &name.span,
                format!("class `{class}` has no method `{}`", name.name),
            );
        };
        if m.params.len() != args.len() {
            return self.err(
                RuntimeErrorKind::ArityMismatch,
                &name.span,
                format!(
                    "method `{}` takes {} argument(s), {} given",
                    name.name,
                    m.params.len(),
                    args.len()
                ),
            );
        }
        let bindings = self.bind_args(&m.params, args, env)?;
        let mut callee = Env::new();
        callee.declare("this", Binding::frozen(Value::Obj(obj)));
        for (p, b) in m.params.iter().zip(bindings) {
            callee.declare(&p.name.name, b);
        }
        self.frame(&name.span, |s| match s.exec_block(&m.body, &mut callee)? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(Value::Unit),
        })
    }

    /// Run the constructor chain for an already-allocated object: base
    /// constructor first (explicit or implicit zero-argument), then field
    /// initializers in declaration order, then the body.
    fn run_ctor(
        &mut self,
        obj_id: usize,
        class: &str,
        bindings: Vec<Binding>,
        site: &Span,
    ) -> Result<(), RuntimeError> {
        let this = ObjRef { id: obj_id, frozen: false };
        let arity = bindings.len();
        let prog = self.prog;
        match prog.ctor_of(class, arity) {
            Some(ctor) => {
                let mut env = Env::new();
                env.declare("this", Binding::frozen(Value::Obj(this)));
                for (p, b) in ctor.params.iter().zip(bindings) {
                    env.declare(&p.name.name, b);
                }
                let base = prog.classes[class].base.as_deref();
                match (&ctor.base_init, base) {
                    (Some(bi), Some(base)) => {
                        let mut vals = Vec::new();
                        for a in &bi.args {
                            vals.push(self.eval(a, &mut env)?);
                        }
                        let base_bindings = vals.into_iter().map(Binding::fresh).collect();
                        self.run_ctor(obj_id, base, base_bindings, &bi.name.span)?;
                    }
                    (None, Some(base)) => {
                        self.run_ctor(obj_id, base, Vec::new(), site)?;
                    }
                    _ => {}
                }
                for fi in &ctor.field_inits {
                    let v = self.eval(&fi.value, &mut env)?;
                    self.write_field(this, &fi.name.name, v, &fi.name.span)?;
                }
                self.frame(site, |s| match s.exec_block(&ctor.body, &mut env)? {
                    Flow::Return(_) | Flow::Normal => Ok(()),
                })
            }
            None => {
                if arity == 0 && prog.has_implicit_default_ctor(class) {
                    if let Some(base) = prog.classes[class].base.as_deref() {
                        self.run_ctor(obj_id, base, Vec::new(), site)?;
                    }
                    Ok(())
                } else {
                    self.err(
                        RuntimeErrorKind::ArityMismatch,
                        site,
                        format!("class `{class}` has no constructor taking {arity} argument(s)"),
                    )
                }
            }
        }
    }
}

/// Deep-freeze a value reached through `constref`: objects become frozen
/// references; lists are rebuilt only if they actually contain objects.
fn freeze_value(v: Value) -> Value {
    match v {
        Value::Obj(o) => Value::Obj(ObjRef { frozen: true, ..o }),
        Value::List(l) => {
            if list_needs_freezing(&l) {
                let frozen: Vec<Value> = l.iter().map(|e| freeze_value(e.clone())).collect();
                Value::List(PList::from_values(frozen))
            } else {
                Value::List(l)
            }
        }
        other => other,
    }
}

fn list_needs_freezing(l: &PList) -> bool {
    l.iter().any(|v| match v {
        Value::Obj(o) => !o.frozen,
        Value::List(inner) => list_needs_freezing(inner),
        _ => false,
    })
}

/// Run `main` (which must exist and take no parameters) in a fresh session.
pub fn run_program(prog: &ResolvedProgram) -> ExecOutcome {
    let span = Span::synthetic("<program>");
    match prog.fun_decl("main") {
        None => ExecOutcome {
            result: Err(RuntimeError {
                kind: RuntimeErrorKind::NoMain,
                span,
                message: "program has no `main` function".into(),
            }),
            output: Vec::new(),
            assertions_failed: Vec::new(),
        },
        Some(f) if !f.params.is_empty() => ExecOutcome {
            result: Err(RuntimeError {
                kind: RuntimeErrorKind::NoMain,
                span,
                message: "`main` must take no parameters".into(),
            }),
            output: Vec::new(),
            assertions_failed: Vec::new(),
        },
        Some(_) => evaluate_function(prog, "main", Vec::new()),
    }
}

/// Call one function in a fresh session and package everything observable.
pub fn evaluate_function(prog: &ResolvedProgram, name: &str, args: Vec<Value>) -> ExecOutcome {
    let mut session = Session::new(prog);
    let result = session.call(name, args);
    ExecOutcome { result, output: session.output, assertions_failed: session.assertions_failed }
}
