//! Canonical source renderer. `parse(pretty_print(p))` is structurally
//! identical to `p` (spans aside), which the frontend tests check via
//! idempotence: pretty-printing the reparse of pretty-printed output must
//! reproduce it byte for byte.
//!
//! Style: two-space indent, visibility sections reconstructed from member
//! order, minimal parentheses (children are parenthesized only when their
//! precedence demands it).

use crate::ast::*;

pub fn pretty_print(program: &Program) -> String {
    let mut p = Printer { out: String::new(), indent: 0 };
    for (i, decl) in program.decls.iter().enumerate() {
        if i > 0 {
            p.out.push('\n');
        }
        match decl {
            Decl::Class(c) => p.class(c),
            Decl::Fun(f) => p.fun(f),
        }
    }
    p.out
}

struct Printer {
    out: String,
    indent: usize,
}

enum Member<'a> {
    Field(&'a FieldDecl),
    Method(&'a MethodDecl),
    Ctor(&'a CtorDecl),
    Friend(&'a FriendDecl),
}

impl Printer {
    fn line(&mut self, text: &str) {
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn class(&mut self, c: &ClassDecl) {
        let mut header = String::new();
        if c.exported {
            header.push_str("export ");
        }
        header.push_str("class ");
        header.push_str(&c.name.name);
        if let Some(base) = &c.base {
            header.push_str(" : ");
            header.push_str(&base.name);
        }
        header.push_str(" {");
        self.line(&header);

        let mut members: Vec<(u32, Member)> = Vec::new();
        members.extend(c.fields.iter().map(|f| (f.ord, Member::Field(f))));
        members.extend(c.methods.iter().map(|m| (m.ord, Member::Method(m))));
        members.extend(c.ctors.iter().map(|k| (k.ord, Member::Ctor(k))));
        members.extend(c.friends.iter().map(|f| (f.ord, Member::Friend(f))));
        members.sort_by_key(|(ord, _)| *ord);

        self.indent += 1;
        let mut section: Option<Vis> = None;
        for (_, m) in members {
            match m {
                Member::Field(f) => {
                    self.section(&mut section, f.vis);
                    self.indent += 1;
                    self.line(&format!("{} {};", f.ty, f.name.name));
                    self.indent -= 1;
                }
                Member::Method(meth) => {
                    self.section(&mut section, meth.vis);
                    self.indent += 1;
                    self.method(meth);
                    self.indent -= 1;
                }
                Member::Ctor(k) => {
                    section = None;
                    self.ctor(k);
                }
                Member::Friend(f) => {
                    section = None;
                    self.line(&format!("friend {};", f.name.name));
                }
            }
        }
        self.indent -= 1;
        self.line("}");
    }

    fn section(&mut self, current: &mut Option<Vis>, vis: Vis) {
        if *current != Some(vis) {
            self.line(match vis {
                Vis::Public => "public:",
                Vis::Private => "private:",
            });
            *current = Some(vis);
        }
    }

    fn params(params: &[Param]) -> String {
        params
            .iter()
            .map(|p| {
                let mode = match p.mode {
                    Mode::Value => "",
                    Mode::Ref => "ref ",
                    Mode::ConstRef => "constref ",
                };
                format!("{mode}{} {}", p.ty, p.name.name)
            })
            .collect::<Vec<_>>()
            .join(", ")
    }

    fn method(&mut self, m: &MethodDecl) {
        let virt = if m.is_virtual() { "virtual " } else { "" };
        self.line(&format!("{virt}{} {}({}) {{", m.ret, m.name.name, Self::params(&m.params)));
        self.block_body(&m.body);
        self.line("}");
    }

    fn ctor(&mut self, k: &CtorDecl) {
        let mut header = format!("{}({})", k.name.name, Self::params(&k.params));
        let mut inits: Vec<String> = Vec::new();
        if let Some(b) = &k.base_init {
            inits.push(format!("{}({})", b.name.name, exprs(&b.args)));
        }
        for fi in &k.field_inits {
            inits.push(format!("{}({})", fi.name.name, expr(&fi.value, 0)));
        }
        if !inits.is_empty() {
            header.push_str(" : ");
            header.push_str(&inits.join(", "));
        }
        header.push_str(" {");
        self.line(&header);
        self.block_body(&k.body);
        self.line("}");
    }

    fn fun(&mut self, f: &FunDecl) {
        self.line(&format!("{} {}({}) {{", f.ret, f.name.name, Self::params(&f.params)));
        self.block_body(&f.body);
        self.line("}");
    }

    fn block_body(&mut self, b: &Block) {
        self.indent += 1;
        for s in &b.stmts {
            self.stmt(s);
        }
        self.indent -= 1;
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Let { name, value } => {
                self.line(&format!("let {} = {};", name.name, expr(value, 0)));
            }
            StmtKind::Assign { target, value } => {
                let t = match target {
                    AssignTarget::Var { name, .. } => name.name.clone(),
                    AssignTarget::Field { base, name } => {
                        format!("{}.{}", expr(base, POSTFIX), name.name)
                    }
                };
                self.line(&format!("{t} = {};", expr(value, 0)));
            }
            StmtKind::If { cond, then_block, else_block } => {
                self.line(&format!("if ({}) {{", expr(cond, 0)));
                self.block_body(then_block);
                match else_block {
                    Some(e) => {
                        self.line("} else {");
                        self.block_body(e);
                        self.line("}");
                    }
                    None => self.line("}"),
                }
            }
            StmtKind::While { cond, body } => {
                self.line(&format!("while ({}) {{", expr(cond, 0)));
                self.block_body(body);
                self.line("}");
            }
            StmtKind::Return(None) => self.line("return;"),
            StmtKind::Return(Some(e)) => self.line(&format!("return {};", expr(e, 0))),
            StmtKind::Assert(e) => self.line(&format!("assert({});", expr(e, 0))),
            StmtKind::Expr(e) => self.line(&format!("{};", expr(e, 0))),
        }
    }
}

const POSTFIX: u8 = 8;
const UNARY: u8 = 7;

fn prec(op: BinOp) -> u8 {
    match op {
        BinOp::Or => 1,
        BinOp::And => 2,
        BinOp::Eq | BinOp::Ne => 3,
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
        BinOp::Add | BinOp::Sub => 5,
        BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
    }
}

fn exprs(es: &[Expr]) -> String {
    es.iter().map(|e| expr(e, 0)).collect::<Vec<_>>().join(", ")
}

/// Render `e`, parenthesizing if its precedence is below `min`.
fn expr(e: &Expr, min: u8) -> String {
    let (text, p) = match &e.kind {
        ExprKind::IntLit(v) => (v.to_string(), POSTFIX),
        ExprKind::BoolLit(b) => (b.to_string(), POSTFIX),
        ExprKind::Nil => ("nil".to_string(), POSTFIX),
        ExprKind::Var(n) => (n.clone(), POSTFIX),
        ExprKind::Field { base, name } => {
            (format!("{}.{}", expr(base, POSTFIX), name.name), POSTFIX)
        }
        ExprKind::MethodCall { recv, name, args } => {
            (format!("{}.{}({})", expr(recv, POSTFIX), name.name, exprs(args)), POSTFIX)
        }
        ExprKind::Call { name, args } => (format!("{}({})", name.name, exprs(args)), POSTFIX),
        ExprKind::New { class, args } => (format!("new {}({})", class.name, exprs(args)), POSTFIX),
        ExprKind::Cons { head, tail } => {
            (format!("cons({}, {})", expr(head, 0), expr(tail, 0)), POSTFIX)
        }
        ExprKind::Head(x) => (format!("head({})", expr(x, 0)), POSTFIX),
        ExprKind::Tail(x) => (format!("tail({})", expr(x, 0)), POSTFIX),
        ExprKind::IsNil(x) => (format!("is_nil({})", expr(x, 0)), POSTFIX),
        ExprKind::Unary { op, operand } => {
            let sym = match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
            };
            (format!("{sym}{}", expr(operand, UNARY)), UNARY)
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let p = prec(*op);
            // left-associative: the right child needs strictly higher precedence
            (format!("{} {} {}", expr(lhs, p), op.symbol(), expr(rhs, p + 1)), p)
        }
    };
    if p < min {
        format!("({text})")
    } else {
        text
    }
}
