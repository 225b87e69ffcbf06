//! Recursive-descent parser. One `IdGen` is threaded through all files of a
//! program so node ids stay unique after the per-file trees are merged.
//!
//! Two places deviate from a naive grammar transcription:
//!
//! * assignment statements are parsed by reading a full expression and then,
//!   on seeing `=`, reinterpreting it as an lvalue (variable or field);
//! * a constructor's initializer list accepts any sequence of
//!   `name(args)` items — an item naming the declared base class is the base
//!   constructor call (allowed once, first), everything else is a
//!   single-expression field initializer. This lets base-less classes write
//!   `CBag() : elems(nil) {}`.

use crate::ast::*;
use crate::lexer::{tokenize, LexError, Token, TokenKind};
use crate::span::Span;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
    pub expected: BTreeSet<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: parse error: {}", self.span, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug)]
pub enum FrontendError {
    Lex(LexError),
    Parse(ParseError),
}

impl fmt::Display for FrontendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrontendError::Lex(e) => e.fmt(f),
            FrontendError::Parse(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for FrontendError {}

impl From<LexError> for FrontendError {
    fn from(e: LexError) -> Self {
        FrontendError::Lex(e)
    }
}

impl From<ParseError> for FrontendError {
    fn from(e: ParseError) -> Self {
        FrontendError::Parse(e)
    }
}

#[derive(Debug, Default)]
pub struct IdGen {
    next: u32,
}

impl IdGen {
    pub fn fresh(&mut self) -> NodeId {
        let id = NodeId(self.next);
        self.next += 1;
        id
    }
}

/// Parse a single already-tokenized file.
pub fn parse_program(tokens: Vec<Token>, ids: &mut IdGen) -> Result<Program, ParseError> {
    let mut p = Parser { tokens, pos: 0, ids };
    let mut decls = Vec::new();
    while !p.at_eof() {
        decls.push(p.decl()?);
    }
    Ok(Program { decls })
}

/// Lex and parse one source file.
pub fn parse_file(source: &str, file: &str, ids: &mut IdGen) -> Result<Program, FrontendError> {
    let tokens = tokenize(source, file)?;
    Ok(parse_program(tokens, ids)?)
}

/// Lex and parse several files (`(file-name, source)`) into one program, in
/// order. Name binding across files happens later, in the resolver.
pub fn load_program(files: &[(String, String)]) -> Result<Program, FrontendError> {
    let mut ids = IdGen::default();
    let mut decls = Vec::new();
    for (name, source) in files {
        decls.extend(parse_file(source, name, &mut ids)?.decls);
    }
    Ok(Program { decls })
}

struct Parser<'i> {
    tokens: Vec<Token>,
    pos: usize,
    ids: &'i mut IdGen,
}

impl<'i> Parser<'i> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek2(&self) -> &Token {
        &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)]
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn at_kw(&self, kw: &str) -> bool {
        let t = self.peek();
        t.kind == TokenKind::Keyword && t.text == kw
    }

    fn at_punct(&self, p: &str) -> bool {
        let t = self.peek();
        t.kind == TokenKind::Punct && t.text == p
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn found_desc(&self) -> String {
        let t = self.peek();
        match t.kind {
            TokenKind::Eof => "end of input".to_string(),
            _ => format!("`{}`", t.text),
        }
    }

    fn err<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        let set: BTreeSet<String> = expected.iter().map(|s| s.to_string()).collect();
        let list = expected.join(" or ");
        Err(ParseError {
            span: self.peek().span.clone(),
            message: format!("expected {list}, found {}", self.found_desc()),
            expected: set,
        })
    }

    fn expect_punct(&mut self, p: &str) -> Result<Token, ParseError> {
        if self.at_punct(p) {
            Ok(self.bump())
        } else {
            self.err(&[&format!("`{p}`")])
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<Token, ParseError> {
        if self.at_kw(kw) {
            Ok(self.bump())
        } else {
            self.err(&[&format!("`{kw}`")])
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<Ident, ParseError> {
        if self.peek().kind == TokenKind::Ident {
            let t = self.bump();
            Ok(Ident { name: t.text, span: t.span })
        } else {
            self.err(&[what])
        }
    }

    // ---- declarations ----

    fn decl(&mut self) -> Result<Decl, ParseError> {
        if self.at_kw("class") || (self.at_kw("export") && self.peek2().text == "class") {
            Ok(Decl::Class(self.class_decl()?))
        } else if self.at_type_start() {
            Ok(Decl::Fun(self.fun_decl()?))
        } else {
            self.err(&["a class declaration", "a function declaration"])
        }
    }

    fn at_type_start(&self) -> bool {
        let t = self.peek();
        match t.kind {
            TokenKind::Ident => true,
            TokenKind::Keyword => matches!(t.text.as_str(), "int" | "bool" | "unit" | "list"),
            _ => false,
        }
    }

    fn type_ref(&mut self) -> Result<TypeRef, ParseError> {
        let t = self.peek().clone();
        match (t.kind, t.text.as_str()) {
            (TokenKind::Keyword, "int") => {
                self.bump();
                Ok(TypeRef::Int)
            }
            (TokenKind::Keyword, "bool") => {
                self.bump();
                Ok(TypeRef::Bool)
            }
            (TokenKind::Keyword, "unit") => {
                self.bump();
                Ok(TypeRef::Unit)
            }
            (TokenKind::Keyword, "list") => {
                self.bump();
                Ok(TypeRef::List)
            }
            (TokenKind::Ident, _) => {
                let t = self.bump();
                Ok(TypeRef::Class(t.text))
            }
            _ => self.err(&["a type"]),
        }
    }

    fn params(&mut self) -> Result<Vec<Param>, ParseError> {
        let mut out = Vec::new();
        self.expect_punct("(")?;
        if self.eat_punct(")") {
            return Ok(out);
        }
        loop {
            let mode = if self.eat_kw("ref") {
                Mode::Ref
            } else if self.eat_kw("constref") {
                Mode::ConstRef
            } else {
                Mode::Value
            };
            let ty = self.type_ref()?;
            let name = self.expect_ident("a parameter name")?;
            out.push(Param { mode, ty, name });
            if self.eat_punct(")") {
                return Ok(out);
            }
            self.expect_punct(",")?;
        }
    }

    fn fun_decl(&mut self) -> Result<FunDecl, ParseError> {
        let ret = self.type_ref()?;
        let name = self.expect_ident("a function name")?;
        let params = self.params()?;
        let body = self.block()?;
        Ok(FunDecl { ret, name, params, body })
    }

    fn class_decl(&mut self) -> Result<ClassDecl, ParseError> {
        let exported = self.eat_kw("export");
        self.expect_kw("class")?;
        let name = self.expect_ident("a class name")?;
        let base =
            if self.eat_punct(":") { Some(self.expect_ident("a base class name")?) } else { None };
        self.expect_punct("{")?;
        let mut class = ClassDecl {
            exported,
            name,
            base,
            fields: Vec::new(),
            methods: Vec::new(),
            ctors: Vec::new(),
            friends: Vec::new(),
        };
        let mut ord = 0u32;
        while !self.eat_punct("}") {
            if self.at_kw("public") || self.at_kw("private") {
                self.vis_section(&mut class, &mut ord)?;
            } else if self.at_kw("friend") {
                self.bump();
                let name = self.expect_ident("a friend function name")?;
                self.expect_punct(";")?;
                class.friends.push(FriendDecl { ord, name });
                ord += 1;
            } else if self.at_ctor_start(&class.name.name) {
                let ctor = self.ctor_decl(&class, ord)?;
                class.ctors.push(ctor);
                ord += 1;
            } else {
                return self.err(&["`public`", "`private`", "`friend`", "a constructor", "`}`"]);
            }
        }
        Ok(class)
    }

    fn at_ctor_start(&self, class_name: &str) -> bool {
        self.peek().kind == TokenKind::Ident
            && self.peek().text == class_name
            && self.peek2().text == "("
    }

    fn vis_section(&mut self, class: &mut ClassDecl, ord: &mut u32) -> Result<(), ParseError> {
        let vis = if self.eat_kw("public") {
            Vis::Public
        } else {
            self.expect_kw("private")?;
            Vis::Private
        };
        self.expect_punct(":")?;
        loop {
            if self.at_punct("}")
                || self.at_kw("public")
                || self.at_kw("private")
                || self.at_kw("friend")
                || self.at_ctor_start(&class.name.name)
            {
                return Ok(());
            }
            let virtual_span = if self.at_kw("virtual") { Some(self.bump().span) } else { None };
            if !self.at_type_start() {
                return self.err(&["a field or method declaration"]);
            }
            let ty = self.type_ref()?;
            let name = self.expect_ident("a member name")?;
            if self.at_punct("(") {
                let params = self.params()?;
                let body = self.block()?;
                class.methods.push(MethodDecl {
                    ord: *ord,
                    vis,
                    virtual_span,
                    ret: ty,
                    name,
                    params,
                    body,
                });
            } else {
                if let Some(vspan) = virtual_span {
                    return Err(ParseError {
                        span: vspan,
                        message: "`virtual` applies only to methods".into(),
                        expected: BTreeSet::new(),
                    });
                }
                self.expect_punct(";")?;
                class.fields.push(FieldDecl { ord: *ord, vis, ty, name });
            }
            *ord += 1;
        }
    }

    fn ctor_decl(&mut self, class: &ClassDecl, ord: u32) -> Result<CtorDecl, ParseError> {
        let name = self.expect_ident("a constructor name")?;
        let params = self.params()?;
        let mut base_init = None;
        let mut field_inits = Vec::new();
        if self.eat_punct(":") {
            let mut first = true;
            loop {
                let item = self.expect_ident("an initializer name")?;
                self.expect_punct("(")?;
                let mut args = Vec::new();
                if !self.eat_punct(")") {
                    loop {
                        args.push(self.expr()?);
                        if self.eat_punct(")") {
                            break;
                        }
                        self.expect_punct(",")?;
                    }
                }
                let is_base = class.base.as_ref().is_some_and(|b| b.name == item.name);
                if is_base {
                    if !first {
                        return Err(ParseError {
                            span: item.span,
                            message:
                                "base constructor call must come first in the initializer list"
                                    .into(),
                            expected: BTreeSet::new(),
                        });
                    }
                    base_init = Some(BaseInit { name: item, args });
                } else {
                    if args.len() != 1 {
                        return Err(ParseError {
                            span: item.span,
                            message: format!(
                                "field initializer `{}` takes exactly one expression",
                                item.name
                            ),
                            expected: BTreeSet::new(),
                        });
                    }
                    let value = args.pop().unwrap();
                    field_inits.push(FieldInit { name: item, value });
                }
                first = false;
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        let body = self.block()?;
        Ok(CtorDecl { ord, name, params, base_init, field_inits, body })
    }

    // ---- statements ----

    fn block(&mut self) -> Result<Block, ParseError> {
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.eat_punct("}") {
            stmts.push(self.stmt()?);
        }
        Ok(Block { stmts })
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        if self.at_kw("let") {
            let kw = self.bump();
            let name = self.expect_ident("a variable name")?;
            self.expect_punct("=")?;
            let value = self.expr()?;
            self.expect_punct(";")?;
            return Ok(Stmt { span: kw.span, kind: StmtKind::Let { name, value } });
        }
        if self.at_kw("if") {
            let kw = self.bump();
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let then_block = self.block()?;
            let else_block = if self.eat_kw("else") { Some(self.block()?) } else { None };
            return Ok(Stmt { span: kw.span, kind: StmtKind::If { cond, then_block, else_block } });
        }
        if self.at_kw("while") {
            let kw = self.bump();
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let body = self.block()?;
            return Ok(Stmt { span: kw.span, kind: StmtKind::While { cond, body } });
        }
        if self.at_kw("return") {
            let kw = self.bump();
            let value = if self.at_punct(";") { None } else { Some(self.expr()?) };
            self.expect_punct(";")?;
            return Ok(Stmt { span: kw.span, kind: StmtKind::Return(value) });
        }
        if self.at_kw("assert") {
            let kw = self.bump();
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            self.expect_punct(";")?;
            return Ok(Stmt { span: kw.span, kind: StmtKind::Assert(cond) });
        }
        let e = self.expr()?;
        if self.at_punct("=") {
            let eq = self.bump();
            let target = match e.kind {
                ExprKind::Var(name) => {
                    AssignTarget::Var { id: e.id, name: Ident { name, span: e.span } }
                }
                ExprKind::Field { base, name } => AssignTarget::Field { base: *base, name },
                _ => {
                    return Err(ParseError {
                        span: eq.span,
                        message: "left side of assignment must be a variable or a field".into(),
                        expected: BTreeSet::new(),
                    })
                }
            };
            let value = self.expr()?;
            self.expect_punct(";")?;
            return Ok(Stmt { span: eq.span, kind: StmtKind::Assign { target, value } });
        }
        self.expect_punct(";")?;
        Ok(Stmt { span: e.span.clone(), kind: StmtKind::Expr(e) })
    }

    // ---- expressions ----

    fn mk(&mut self, span: Span, kind: ExprKind) -> Expr {
        Expr { id: self.ids.fresh(), span, kind }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.at_punct("||") {
            let op = self.bump();
            let rhs = self.and_expr()?;
            lhs = self.mk(
                op.span,
                ExprKind::Binary { op: BinOp::Or, lhs: Box::new(lhs), rhs: Box::new(rhs) },
            );
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.equality()?;
        while self.at_punct("&&") {
            let op = self.bump();
            let rhs = self.equality()?;
            lhs = self.mk(
                op.span,
                ExprKind::Binary { op: BinOp::And, lhs: Box::new(lhs), rhs: Box::new(rhs) },
            );
        }
        Ok(lhs)
    }

    fn equality(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.relational()?;
        loop {
            let op = if self.at_punct("==") {
                BinOp::Eq
            } else if self.at_punct("!=") {
                BinOp::Ne
            } else {
                return Ok(lhs);
            };
            let tok = self.bump();
            let rhs = self.relational()?;
            lhs =
                self.mk(tok.span, ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) });
        }
    }

    fn relational(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.additive()?;
        loop {
            let op = if self.at_punct("<") {
                BinOp::Lt
            } else if self.at_punct("<=") {
                BinOp::Le
            } else if self.at_punct(">") {
                BinOp::Gt
            } else if self.at_punct(">=") {
                BinOp::Ge
            } else {
                return Ok(lhs);
            };
            let tok = self.bump();
            let rhs = self.additive()?;
            lhs =
                self.mk(tok.span, ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) });
        }
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = if self.at_punct("+") {
                BinOp::Add
            } else if self.at_punct("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let tok = self.bump();
            let rhs = self.multiplicative()?;
            lhs =
                self.mk(tok.span, ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) });
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.at_punct("*") {
                BinOp::Mul
            } else if self.at_punct("/") {
                BinOp::Div
            } else if self.at_punct("%") {
                BinOp::Rem
            } else {
                return Ok(lhs);
            };
            let tok = self.bump();
            let rhs = self.unary()?;
            lhs =
                self.mk(tok.span, ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) });
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.at_punct("!") {
            let tok = self.bump();
            let operand = self.unary()?;
            return Ok(
                self.mk(tok.span, ExprKind::Unary { op: UnOp::Not, operand: Box::new(operand) })
            );
        }
        if self.at_punct("-") {
            let tok = self.bump();
            let operand = self.unary()?;
            return Ok(
                self.mk(tok.span, ExprKind::Unary { op: UnOp::Neg, operand: Box::new(operand) })
            );
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        while self.at_punct(".") {
            self.bump();
            let name = self.expect_ident("a member name")?;
            if self.at_punct("(") {
                let args = self.call_args()?;
                let span = name.span.clone();
                e = self.mk(span, ExprKind::MethodCall { recv: Box::new(e), name, args });
            } else {
                let span = name.span.clone();
                e = self.mk(span, ExprKind::Field { base: Box::new(e), name });
            }
        }
        Ok(e)
    }

    fn call_args(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        if self.eat_punct(")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat_punct(")") {
                return Ok(args);
            }
            self.expect_punct(",")?;
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match t.kind {
            TokenKind::IntLit => {
                self.bump();
                let value: i64 = t.text.parse().map_err(|_| ParseError {
                    span: t.span.clone(),
                    message: format!("integer literal `{}` is out of range", t.text),
                    expected: BTreeSet::new(),
                })?;
                Ok(self.mk(t.span, ExprKind::IntLit(value)))
            }
            TokenKind::StrLit => Err(ParseError {
                span: t.span,
                message: "string literals are not values in this language".into(),
                expected: BTreeSet::new(),
            }),
            TokenKind::Keyword => match t.text.as_str() {
                "true" => {
                    self.bump();
                    Ok(self.mk(t.span, ExprKind::BoolLit(true)))
                }
                "false" => {
                    self.bump();
                    Ok(self.mk(t.span, ExprKind::BoolLit(false)))
                }
                "nil" => {
                    self.bump();
                    Ok(self.mk(t.span, ExprKind::Nil))
                }
                "cons" => {
                    self.bump();
                    self.expect_punct("(")?;
                    let head = self.expr()?;
                    self.expect_punct(",")?;
                    let tail = self.expr()?;
                    self.expect_punct(")")?;
                    Ok(self
                        .mk(t.span, ExprKind::Cons { head: Box::new(head), tail: Box::new(tail) }))
                }
                "head" | "tail" | "is_nil" => {
                    self.bump();
                    self.expect_punct("(")?;
                    let arg = self.expr()?;
                    self.expect_punct(")")?;
                    let kind = match t.text.as_str() {
                        "head" => ExprKind::Head(Box::new(arg)),
                        "tail" => ExprKind::Tail(Box::new(arg)),
                        _ => ExprKind::IsNil(Box::new(arg)),
                    };
                    Ok(self.mk(t.span, kind))
                }
                "new" => {
                    self.bump();
                    let class = self.expect_ident("a class name")?;
                    let args = self.call_args()?;
                    Ok(self.mk(t.span, ExprKind::New { class, args }))
                }
                _ => self.err(&["an expression"]),
            },
            TokenKind::Ident => {
                self.bump();
                if self.at_punct("(") {
                    let args = self.call_args()?;
                    let name = Ident { name: t.text, span: t.span.clone() };
                    Ok(self.mk(t.span, ExprKind::Call { name, args }))
                } else {
                    Ok(self.mk(t.span, ExprKind::Var(t.text)))
                }
            }
            TokenKind::Punct if t.text == "(" => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            _ => self.err(&["an expression"]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_one(src: &str) -> Result<Program, FrontendError> {
        let mut ids = IdGen::default();
        parse_file(src, "t.moo", &mut ids)
    }

    #[test]
    fn empty_class_parses() {
        let p = parse_one("class A {}").unwrap();
        assert_eq!(p.decls.len(), 1);
        let c = p.classes().next().unwrap();
        assert_eq!(c.name.name, "A");
        assert!(!c.exported && c.base.is_none());
    }

    #[test]
    fn exported_class_with_base_and_sections() {
        let p = parse_one(
            "export class B : A {\n  public:\n    int n;\n    virtual int get() { return n; }\n  private:\n    list xs;\n  B() : A(), xs(nil) {\n  }\n  friend peek;\n}",
        )
        .unwrap();
        let c = p.classes().next().unwrap();
        assert_eq!(c.base.as_ref().unwrap().name, "A");
        assert_eq!(c.fields.len(), 2);
        assert_eq!(c.fields[0].vis, Vis::Public);
        assert_eq!(c.fields[1].vis, Vis::Private);
        assert!(c.methods[0].is_virtual());
        let ctor = &c.ctors[0];
        assert!(ctor.base_init.is_some());
        assert_eq!(ctor.field_inits.len(), 1);
        assert_eq!(c.friends[0].name.name, "peek");
    }

    #[test]
    fn field_initializers_without_base_init() {
        let p = parse_one("class A { private: list xs; A() : xs(nil) {} }").unwrap();
        let c = p.classes().next().unwrap();
        assert!(c.ctors[0].base_init.is_none());
        assert_eq!(c.ctors[0].field_inits[0].name.name, "xs");
    }

    #[test]
    fn base_init_must_come_first() {
        let err = parse_one("class B : A { private: int x; B() : x(1), A() {} }").unwrap_err();
        assert!(err.to_string().contains("must come first"));
    }

    #[test]
    fn precedence_binds_mul_tighter_than_add_and_cmp() {
        let p = parse_one("int f() { return 1 + 2 * 3 < 4 && true; }").unwrap();
        let f = p.functions().next().unwrap();
        let StmtKind::Return(Some(e)) = &f.body.stmts[0].kind else { panic!() };
        // top node must be &&
        let ExprKind::Binary { op: BinOp::And, lhs, .. } = &e.kind else { panic!("{e:?}") };
        let ExprKind::Binary { op: BinOp::Lt, lhs: add, .. } = &lhs.kind else { panic!() };
        let ExprKind::Binary { op: BinOp::Add, rhs: mul, .. } = &add.kind else { panic!() };
        assert!(matches!(mul.kind, ExprKind::Binary { op: BinOp::Mul, .. }));
    }

    #[test]
    fn assignment_targets_are_vars_or_fields() {
        let p = parse_one("unit f() { x = 1; a.b = 2; }").unwrap();
        let f = p.functions().next().unwrap();
        assert!(matches!(
            f.body.stmts[0].kind,
            StmtKind::Assign { target: AssignTarget::Var { .. }, .. }
        ));
        assert!(matches!(
            f.body.stmts[1].kind,
            StmtKind::Assign { target: AssignTarget::Field { .. }, .. }
        ));
        let err = parse_one("unit f() { g() = 1; }").unwrap_err();
        assert!(err.to_string().contains("left side of assignment"));
    }

    #[test]
    fn assignment_span_is_the_equals_sign() {
        let p = parse_one("unit f() { xs = tail(xs); }").unwrap();
        let f = p.functions().next().unwrap();
        let span = &f.body.stmts[0].span;
        assert_eq!((span.line, span.col), (1, 15));
    }

    #[test]
    fn method_call_chains_and_new() {
        let p = parse_one("unit f() { let c = new C(1, 2); c.put(3); let x = c.elems; }").unwrap();
        let f = p.functions().next().unwrap();
        assert_eq!(f.body.stmts.len(), 3);
    }

    #[test]
    fn list_builtins_have_fixed_arity() {
        assert!(parse_one("unit f() { let x = cons(1, nil); }").is_ok());
        assert!(parse_one("unit f() { let x = cons(1); }").is_err());
        assert!(parse_one("unit f() { let x = head(); }").is_err());
    }

    #[test]
    fn error_carries_expected_set() {
        let err = parse_one("class A { public int x; }");
        let Err(FrontendError::Parse(e)) = err else { panic!() };
        assert!(e.expected.contains("`:`"));
    }

    #[test]
    fn unbalanced_braces_report_eof() {
        let err = parse_one("class A {").unwrap_err();
        assert!(err.to_string().contains("end of input"));
    }

    #[test]
    fn node_ids_stay_unique_across_files() {
        let prog = load_program(&[
            ("a.moo".into(), "int f() { return 1 + 2; }".into()),
            ("b.moo".into(), "int g() { return 3 + 4; }".into()),
        ])
        .unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for f in prog.functions() {
            for s in &f.body.stmts {
                if let StmtKind::Return(Some(e)) = &s.kind {
                    collect_ids(e, &mut seen);
                }
            }
        }
        assert_eq!(seen.len(), 6); // three expr nodes per file, all distinct
    }

    fn collect_ids(e: &Expr, out: &mut std::collections::BTreeSet<u32>) {
        assert!(out.insert(e.id.0), "duplicate node id");
        if let ExprKind::Binary { lhs, rhs, .. } = &e.kind {
            collect_ids(lhs, out);
            collect_ids(rhs, out);
        }
    }
}
