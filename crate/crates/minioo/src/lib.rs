//! Analysis workbench for MiniOO, a deliberately small class-based object
//! language. The crate bundles three things that are usually separate tools:
//!
//! * a frontend (lexer, parser, resolver, pretty printer) for `.moo` sources,
//! * a rule checker that enforces a discipline under which subclassing is
//!   behaviorally safe (no virtuals, opaque exports, no mutation, delegating
//!   constructors),
//! * a tree-walking interpreter plus a behavioral harness: contract suites,
//!   factory substitution, differential input search, and a multiplicative
//!   integer model of bags used as an executable cross-check.
//!
//! The `corpus/` directory at the workspace root holds the example programs
//! (classic mutable bag/set, functional bag/set, two shape designs) together
//! with golden outputs; `minioo corpus-verify corpus` replays all of them.

pub mod ast;
pub mod check;
pub mod cli;
pub mod corpusck;
pub mod harness;
pub mod interp;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod resolve;
pub mod span;

pub use span::Span;
