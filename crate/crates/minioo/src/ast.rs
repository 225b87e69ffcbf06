//! Abstract syntax for MiniOO. Every expression (and assignment target)
//! carries a `NodeId`; the resolver keys its side tables (name bindings,
//! dispatch classification) on those ids rather than mutating the tree.
//!
//! Class members record their source position inside the class (`ord`) so
//! the pretty printer can reproduce the original interleaving of visibility
//! sections, constructors and friend declarations.

use crate::span::Span;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

#[derive(Clone, Debug)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Vis {
    Public,
    Private,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Value,
    Ref,
    ConstRef,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeRef {
    Int,
    Bool,
    Unit,
    List,
    Class(String),
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeRef::Int => write!(f, "int"),
            TypeRef::Bool => write!(f, "bool"),
            TypeRef::Unit => write!(f, "unit"),
            TypeRef::List => write!(f, "list"),
            TypeRef::Class(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Param {
    pub mode: Mode,
    pub ty: TypeRef,
    pub name: Ident,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub id: NodeId,
    pub span: Span,
    pub kind: ExprKind,
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    IntLit(i64),
    BoolLit(bool),
    Nil,
    /// A bare name: a local, a parameter, `this`, or a field of `this`.
    Var(String),
    Field {
        base: Box<Expr>,
        name: Ident,
    },
    /// `recv.name(args)` — dispatched through the receiver.
    MethodCall {
        recv: Box<Expr>,
        name: Ident,
        args: Vec<Expr>,
    },
    /// `name(args)` — a free function, a method of `this`, or `print`.
    Call {
        name: Ident,
        args: Vec<Expr>,
    },
    New {
        class: Ident,
        args: Vec<Expr>,
    },
    Cons {
        head: Box<Expr>,
        tail: Box<Expr>,
    },
    Head(Box<Expr>),
    Tail(Box<Expr>),
    IsNil(Box<Expr>),
    Unary {
        op: UnOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
}

#[derive(Clone, Debug)]
pub enum AssignTarget {
    /// `x = …` where `x` is a local or a field of `this`.
    Var { id: NodeId, name: Ident },
    /// `e.f = …`.
    Field { base: Expr, name: Ident },
}

#[derive(Clone, Debug)]
pub struct Block {
    pub stmts: Vec<Stmt>,
}

#[derive(Clone, Debug)]
pub struct Stmt {
    /// Anchor for diagnostics: the introducing keyword, or the `=` of an
    /// assignment.
    pub span: Span,
    pub kind: StmtKind,
}

#[derive(Clone, Debug)]
pub enum StmtKind {
    Let { name: Ident, value: Expr },
    Assign { target: AssignTarget, value: Expr },
    If { cond: Expr, then_block: Block, else_block: Option<Block> },
    While { cond: Expr, body: Block },
    Return(Option<Expr>),
    Assert(Expr),
    Expr(Expr),
}

#[derive(Clone, Debug)]
pub struct FieldDecl {
    pub ord: u32,
    pub vis: Vis,
    pub ty: TypeRef,
    pub name: Ident,
}

#[derive(Clone, Debug)]
pub struct MethodDecl {
    pub ord: u32,
    pub vis: Vis,
    /// Span of the `virtual` keyword when present.
    pub virtual_span: Option<Span>,
    pub ret: TypeRef,
    pub name: Ident,
    pub params: Vec<Param>,
    pub body: Block,
}

impl MethodDecl {
    pub fn is_virtual(&self) -> bool {
        self.virtual_span.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct BaseInit {
    pub name: Ident,
    pub args: Vec<Expr>,
}

#[derive(Clone, Debug)]
pub struct FieldInit {
    pub name: Ident,
    pub value: Expr,
}

#[derive(Clone, Debug)]
pub struct CtorDecl {
    pub ord: u32,
    pub name: Ident,
    pub params: Vec<Param>,
    pub base_init: Option<BaseInit>,
    pub field_inits: Vec<FieldInit>,
    pub body: Block,
}

#[derive(Clone, Debug)]
pub struct FriendDecl {
    pub ord: u32,
    pub name: Ident,
}

#[derive(Clone, Debug)]
pub struct ClassDecl {
    pub exported: bool,
    pub name: Ident,
    pub base: Option<Ident>,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    pub ctors: Vec<CtorDecl>,
    pub friends: Vec<FriendDecl>,
}

#[derive(Clone, Debug)]
pub struct FunDecl {
    pub ret: TypeRef,
    pub name: Ident,
    pub params: Vec<Param>,
    pub body: Block,
}

#[derive(Clone, Debug)]
pub enum Decl {
    Class(ClassDecl),
    Fun(FunDecl),
}

#[derive(Clone, Debug, Default)]
pub struct Program {
    pub decls: Vec<Decl>,
}

impl Program {
    pub fn classes(&self) -> impl Iterator<Item = &ClassDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Class(c) => Some(c),
            Decl::Fun(_) => None,
        })
    }

    pub fn functions(&self) -> impl Iterator<Item = &FunDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Fun(f) => Some(f),
            Decl::Class(_) => None,
        })
    }
}
